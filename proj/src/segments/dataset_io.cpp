#include "ratelab/segments/dataset_io.hpp"

#include <fstream>
#include <ostream>

#include "ratelab/common/errors.hpp"

namespace ratelab::segments {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw FormatError("expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(doc.size());
  const auto cols = rows == 0 ? Eigen::Index{0}
                              : static_cast<Eigen::Index>(doc[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = doc[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw FormatError("ragged matrix row " + std::to_string(i));
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
  }
  return m;
}

nlohmann::json segment_to_json(const Segment& segment) {
  return {{"segment_id", segment.segment_id},
          {"env", segment.env_name},
          {"source_step", segment.source_step},
          {"states", matrix_to_json(segment.states)},
          {"actions", matrix_to_json(segment.actions)},
          {"step_rewards", segment.step_rewards},
          {"ground_truth_return", segment.ground_truth_return}};
}

Segment segment_from_json(const nlohmann::json& doc) {
  Segment s;
  s.segment_id = doc.at("segment_id").get<std::uint64_t>();
  s.env_name = doc.value("env", std::string{});
  s.source_step = doc.value("source_step", std::int64_t{0});
  s.states = matrix_from_json(doc.at("states"));
  s.actions = matrix_from_json(doc.at("actions"));
  s.step_rewards = doc.at("step_rewards").get<std::vector<double>>();
  s.ground_truth_return = doc.at("ground_truth_return").get<double>();
  try {
    validate(s);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return s;
}

nlohmann::json example_to_json(const RatingExample& example, int n_classes) {
  nlohmann::json doc = segment_to_json(example.segment);
  doc["rating"] = example.rating;
  doc["n_classes"] = n_classes;
  doc["rater"] = std::string(to_string(example.rater));
  doc["rater_id"] = example.rater_id;
  return doc;
}

RatingExample example_from_json(const nlohmann::json& doc, int n_classes) {
  if (doc.contains("n_classes") && doc["n_classes"].get<int>() != n_classes) {
    throw FormatError("example recorded with " +
                      std::to_string(doc["n_classes"].get<int>()) +
                      " classes, expected " + std::to_string(n_classes));
  }
  try {
    return make_rating_example(segment_from_json(doc), doc.at("rating").get<int>(),
                               n_classes,
                               parse_rater_kind(doc.at("rater").get<std::string>()),
                               doc.value("rater_id", std::string{}));
  } catch (const std::out_of_range& e) {
    throw FormatError(e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

void append_jsonl(std::ostream& out, const RatingExample& example,
                  int n_classes) {
  out << example_to_json(example, n_classes).dump() << '\n';
  out.flush();
}

void save_jsonl(const RatingDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& ex : dataset.examples()) {
    append_jsonl(out, ex, dataset.n_classes());
  }
}

RatingDataset load_jsonl(const std::filesystem::path& path, int n_classes) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  RatingDataset dataset(n_classes);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      dataset.add(example_from_json(nlohmann::json::parse(line), n_classes));
    } catch (const std::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return dataset;
}

}  // namespace ratelab::segments
