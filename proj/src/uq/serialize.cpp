#include <fstream>
#include <sstream>

#include <json.hpp>

#include "edagger/common/errors.hpp"
#include "edagger/uq/ensemble.hpp"

namespace edagger::uq {

namespace {

constexpr const char* kFormat = "edagger.ensemble_policy";
constexpr int kVersion = 1;

}  // namespace

std::string policy_to_json(const EnsemblePolicy& policy) {
  const nn::DenseNet& first = policy.members().front();
  nlohmann::json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["widths"] = std::vector<std::size_t>(first.widths().begin(), first.widths().end());
  doc["activation"] = std::string(nn::to_string(first.hidden_activation()));
  doc["head"] = std::string(nn::to_string(first.output_head()));
  nlohmann::json members = nlohmann::json::array();
  for (const nn::DenseNet& m : policy.members()) {
    members.push_back(std::vector<double>(m.parameters().begin(), m.parameters().end()));
  }
  doc["members"] = std::move(members);
  return doc.dump();
}

EnsemblePolicy policy_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("policy file is not valid JSON: ") + e.what());
  }
  if (doc.value("format", "") != kFormat) throw ConfigError("not an ensemble policy file");
  if (doc.value("version", 0) != kVersion) {
    throw ConfigError("unsupported policy file version " + doc.value("version", nlohmann::json()).dump());
  }
  const auto widths = doc.at("widths").get<std::vector<std::size_t>>();
  const auto activation = nn::parse_activation(doc.at("activation").get<std::string>());
  const auto head = nn::parse_output_head(doc.at("head").get<std::string>());
  std::vector<nn::DenseNet> members;
  for (const auto& entry : doc.at("members")) {
    nn::DenseNet net(widths, activation, head);
    const auto params = entry.get<std::vector<double>>();
    if (params.size() != net.parameter_count()) {
      throw ShapeError("policy member has " + std::to_string(params.size()) + " parameters, expected " +
                       std::to_string(net.parameter_count()));
    }
    std::copy(params.begin(), params.end(), net.parameters().begin());
    members.push_back(std::move(net));
  }
  return EnsemblePolicy(std::move(members));
}

void save_policy(const EnsemblePolicy& policy, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << policy_to_json(policy) << '\n';
}

EnsemblePolicy load_policy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return policy_from_json(buffer.str());
}

}  // namespace edagger::uq
