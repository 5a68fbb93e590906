#include "ratelab/nnet/serialization.hpp"

#include <fstream>
#include <string>

#include "ratelab/common/errors.hpp"

namespace ratelab::nnet {

namespace {
constexpr const char* kFormat = "ratelab.dense_net/1";
}

template <typename T>
nlohmann::json to_json(const BasicDenseNet<T>& net) {
  nlohmann::json doc;
  doc["format"] = kFormat;
  doc["widths"] = net.widths();
  doc["hidden_activation"] = std::string(to_string(net.hidden_activation()));
  doc["output_activation"] = std::string(to_string(net.output_activation()));
  nlohmann::json layers = nlohmann::json::array();
  for (int l = 0; l < net.layer_count(); ++l) {
    const auto w = net.weight(l);
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(w.cols()));
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        row[static_cast<std::size_t>(j)] = static_cast<double>(w(i, j));
      }
      rows.push_back(std::move(row));
    }
    const auto b = net.bias(l);
    std::vector<double> bias(b.data(), b.data() + b.size());
    layers.push_back({{"weights", std::move(rows)}, {"bias", std::move(bias)}});
  }
  doc["layers"] = std::move(layers);
  return doc;
}

template <typename T>
BasicDenseNet<T> dense_net_from_json(
    const nlohmann::json& doc,
    const std::optional<std::vector<int>>& expected_widths) {
  try {
    if (doc.at("format").get<std::string>() != kFormat) {
      throw FormatError("unsupported dense net format '" +
                        doc.at("format").get<std::string>() + "'");
    }
    auto widths = doc.at("widths").get<std::vector<int>>();
    if (expected_widths && *expected_widths != widths) {
      throw FormatError("dense net widths do not match the expected shape");
    }
    if (parse_activation(doc.at("hidden_activation").get<std::string>()) !=
        Activation::tanh) {
      throw FormatError("only tanh hidden layers are supported");
    }
    const Activation out =
        parse_activation(doc.at("output_activation").get<std::string>());
    BasicDenseNet<T> net(widths, out);
    const auto& layers = doc.at("layers");
    if (!layers.is_array() ||
        layers.size() != static_cast<std::size_t>(net.layer_count())) {
      throw FormatError("dense net layer count does not match widths");
    }
    BasicDenseNet<T> staging = net;
    for (int l = 0; l < net.layer_count(); ++l) {
      const auto& layer = layers[static_cast<std::size_t>(l)];
      const auto& rows = layer.at("weights");
      auto w = staging.weight(l);
      if (rows.size() != static_cast<std::size_t>(w.rows())) {
        throw FormatError("weight rows mismatch in layer " + std::to_string(l));
      }
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        const auto row = rows[static_cast<std::size_t>(i)].get<std::vector<double>>();
        if (row.size() != static_cast<std::size_t>(w.cols())) {
          throw FormatError("weight columns mismatch in layer " +
                            std::to_string(l));
        }
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
          w(i, j) = static_cast<T>(row[static_cast<std::size_t>(j)]);
        }
      }
      const auto bias = layer.at("bias").get<std::vector<double>>();
      auto b = staging.bias(l);
      if (bias.size() != static_cast<std::size_t>(b.size())) {
        throw FormatError("bias size mismatch in layer " + std::to_string(l));
      }
      for (Eigen::Index i = 0; i < b.size(); ++i) {
        b(i) = static_cast<T>(bias[static_cast<std::size_t>(i)]);
      }
    }
    net.set_parameters(staging.parameters());
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed dense net checkpoint: ") + e.what());
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const nlohmann::json& doc,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << doc.dump() << '\n';
}

template <typename T>
void save_dense_net(const BasicDenseNet<T>& net,
                    const std::filesystem::path& path) {
  write_json_file(to_json(net), path);
}

template <typename T>
BasicDenseNet<T> load_dense_net(
    const std::filesystem::path& path,
    const std::optional<std::vector<int>>& expected_widths) {
  return dense_net_from_json<T>(read_json_file(path), expected_widths);
}

#define RATELAB_INSTANTIATE(T)                                               \
  template nlohmann::json to_json(const BasicDenseNet<T>&);                 \
  template BasicDenseNet<T> dense_net_from_json<T>(                         \
      const nlohmann::json&, const std::optional<std::vector<int>>&);       \
  template void save_dense_net(const BasicDenseNet<T>&,                     \
                               const std::filesystem::path&);               \
  template BasicDenseNet<T> load_dense_net<T>(                              \
      const std::filesystem::path&, const std::optional<std::vector<int>>&);

RATELAB_INSTANTIATE(float)
RATELAB_INSTANTIATE(double)

#undef RATELAB_INSTANTIATE

}  // namespace ratelab::nnet
