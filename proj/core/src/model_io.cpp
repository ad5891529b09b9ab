#include "localma/model_io.hpp"

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "localma/errors.hpp"

namespace localma {

using nlohmann::json;

namespace {

std::vector<double> row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void write_model(std::ostream& out, const GatingNetwork& network, const ModelMeta& meta) {
  network.check();
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["dims"] = network.dims();
  doc["logit_clamp"] = network.logit_clamp;
  doc["pin_last_logit"] = network.pin_last_logit;
  doc["loss"] = std::string(to_string(meta.loss));
  json layers = json::array();
  for (const auto& layer : network.layers) {
    layers.push_back({{"weights", row_major(layer.weights)}, {"bias", to_vector(layer.bias)}});
  }
  doc["layers"] = std::move(layers);
  json training{{"task", std::string(to_string(meta.task))},
                {"num_classes", meta.num_classes},
                {"seed", meta.seed},
                {"iterations", meta.iterations},
                {"final_loss", meta.final_loss}};
  doc["training"] = std::move(training);
  if (meta.standardizer) {
    doc["standardize"] = {{"mean", to_vector(meta.standardizer->mean)},
                          {"scale", to_vector(meta.standardizer->scale)}};
  }
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing model");
}

void save_model(const std::filesystem::path& path, const GatingNetwork& network,
                const ModelMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_model(out, network, meta);
}

StoredModel read_model(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::VersionMismatch, "model format_version " + std::to_string(version) +
                                                  " is not supported (expected " +
                                                  std::to_string(kModelFormatVersion) + ")");
    }
    StoredModel model;
    const auto dims = doc.at("dims").get<std::vector<int>>();
    const auto& layers = doc.at("layers");
    if (dims.size() < 3 || layers.size() + 1 != dims.size()) {
      throw Error(ErrorCode::CorruptFile, "dims and layer count disagree");
    }
    model.network.logit_clamp = doc.at("logit_clamp").get<double>();
    model.network.pin_last_logit = doc.at("pin_last_logit").get<bool>();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto weights = layers[l].at("weights").get<std::vector<double>>();
      const auto bias = layers[l].at("bias").get<std::vector<double>>();
      const int rows = dims[l + 1];
      const int cols = dims[l];
      if (rows < 1 || cols < 1 ||
          weights.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) ||
          bias.size() != static_cast<std::size_t>(rows)) {
        throw Error(ErrorCode::CorruptFile, "layer " + std::to_string(l) + " has wrong length");
      }
      DenseLayer layer{Eigen::MatrixXd(rows, cols), from_vector(bias)};
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          layer.weights(r, c) = weights[static_cast<std::size_t>(r) * cols + c];
        }
      }
      model.network.layers.push_back(std::move(layer));
    }
    model.meta.loss = parse_loss_kind(doc.at("loss").get<std::string>());
    const auto& training = doc.at("training");
    model.meta.task = parse_task(training.at("task").get<std::string>());
    model.meta.num_classes = training.at("num_classes").get<int>();
    model.meta.seed = training.at("seed").get<std::uint64_t>();
    model.meta.iterations = training.at("iterations").get<int>();
    model.meta.final_loss = training.at("final_loss").get<double>();
    if (doc.contains("standardize")) {
      Standardizer s;
      s.mean = from_vector(doc["standardize"].at("mean").get<std::vector<double>>());
      s.scale = from_vector(doc["standardize"].at("scale").get<std::vector<double>>());
      if (s.mean.size() != dims[0] || s.scale.size() != dims[0]) {
        throw Error(ErrorCode::CorruptFile, "standardizer length differs from p");
      }
      model.meta.standardizer = std::move(s);
    }
    model.network.check();
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("model file is incomplete: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::VersionMismatch || e.code() == ErrorCode::CorruptFile) throw;
    throw Error(ErrorCode::CorruptFile, e.what());
  }
}

StoredModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_model(in);
}

}  // namespace localma
