#include "io/model_io.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>

#include <json.hpp>

#include "common/error.hpp"
#include "common/text.hpp"

namespace edgeboost::io {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void put_le(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

double get_le(const std::string& in, std::size_t at) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + static_cast<std::size_t>(i)])) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

ordered_json parse_json(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    fail(ErrorCode::load_error, e.what());
  }
  try {
    return ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    fail(ErrorCode::load_error, path + ": invalid JSON: " + e.what());
  }
}

void check_header(const ordered_json& j, const char* format, const std::string& path) {
  require(j.is_object() && j.value("format", "") == format, ErrorCode::load_error,
          path + ": not an " + std::string(format) + " file");
  require(j.value("version", -1) == kFormatVersion, ErrorCode::load_error, path + ": unsupported version");
}

void write_json(const std::string& path, const ordered_json& j) { write_file(path, j.dump(2) + "\n"); }

}  // namespace

void save_learner(const nn::WeakLearner& learner, const std::string& dir, const std::string& stem) {
  nn::check_consistent(learner);
  fs::create_directories(dir);
  std::string blob;
  ordered_json layers = ordered_json::array();
  for (const auto& p : learner.params) {
    layers.push_back({{"weights", p.weights.size()}, {"bias", p.bias.size()}});
    for (double w : p.weights) put_le(blob, w);
    for (double b : p.bias) put_le(blob, b);
  }
  ordered_json j;
  j["format"] = "edgeboost-learner";
  j["version"] = kFormatVersion;
  j["id"] = learner.id;
  j["generation"] = learner.generation;
  j["macs"] = learner.macs;
  j["parameters"] = nn::count_parameters(learner.spec);
  j["eval_accuracy"] = learner.eval_accuracy;
  j["spec"] = ordered_json::parse(nn::to_json(learner.spec).dump());
  j["parameter_file"] = stem + ".bin";
  j["layers"] = layers;
  write_file((fs::path(dir) / (stem + ".bin")).string(), blob);
  write_json((fs::path(dir) / (stem + ".json")).string(), j);
}

nn::WeakLearner load_learner(const std::string& json_path) {
  const ordered_json j = parse_json(json_path);
  check_header(j, "edgeboost-learner", json_path);
  nn::WeakLearner l;
  std::string blob;
  try {
    l.spec = nn::network_spec_from_json(nlohmann::json::parse(j.at("spec").dump()));
    l.id = j.at("id").get<std::uint32_t>();
    l.generation = j.at("generation").get<int>();
    l.macs = j.at("macs").get<std::uint64_t>();
    l.eval_accuracy = j.at("eval_accuracy").get<double>();
    const auto bin = fs::path(json_path).parent_path() / j.at("parameter_file").get<std::string>();
    try {
      blob = read_file(bin.string());
    } catch (const Error& e) {
      fail(ErrorCode::load_error, e.what());
    }
    const auto& layers = j.at("layers");
    require(layers.size() == l.spec.layers.size(), ErrorCode::load_error, json_path + ": layer count mismatch");
    std::size_t at = 0;
    for (const auto& ly : layers) {
      nn::LayerParams p;
      const auto nw = ly.at("weights").get<std::size_t>(), nb = ly.at("bias").get<std::size_t>();
      require(blob.size() >= (at + nw + nb) * 8, ErrorCode::load_error, json_path + ": parameter file truncated");
      for (std::size_t i = 0; i < nw; ++i) p.weights.push_back(get_le(blob, 8 * at++));
      for (std::size_t i = 0; i < nb; ++i) p.bias.push_back(get_le(blob, 8 * at++));
      l.params.push_back(std::move(p));
    }
    require(blob.size() == at * 8, ErrorCode::load_error, json_path + ": parameter file has trailing data");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::load_error) throw;
    fail(ErrorCode::load_error, json_path + ": " + e.what());
  } catch (const ordered_json::exception& e) {
    fail(ErrorCode::load_error, json_path + ": " + e.what());
  }
  try {
    nn::check_consistent(l);
  } catch (const Error& e) {
    fail(ErrorCode::load_error, json_path + ": " + e.what());
  }
  require(l.macs == nn::count_macs(l.spec), ErrorCode::load_error, json_path + ": stored MAC count is stale");
  return l;
}

void save_pool(const PoolInfo& pool, const std::string& dir) {
  fs::create_directories(dir);
  ordered_json list = ordered_json::array();
  for (std::size_t i = 0; i < pool.learners.size(); ++i) {
    const auto& l = pool.learners[i];
    const std::string stem = pool.files.size() > i ? fs::path(pool.files[i]).stem().string()
                                                   : "learner_" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    save_learner(l, dir, stem);
    list.push_back({{"file", stem + ".json"},
                    {"id", l.id},
                    {"generation", l.generation},
                    {"macs", l.macs},
                    {"parameters", nn::count_parameters(l.spec)},
                    {"eval_accuracy", l.eval_accuracy}});
  }
  ordered_json j;
  j["format"] = "edgeboost-pool";
  j["version"] = kFormatVersion;
  j["baseline_macs"] = pool.baseline_macs;
  j["baseline_parameters"] = pool.baseline_parameters;
  j["learners"] = list;
  write_json((fs::path(dir) / "manifest.json").string(), j);
}

PoolInfo load_pool(const std::string& dir) {
  const std::string path = (fs::path(dir) / "manifest.json").string();
  const ordered_json j = parse_json(path);
  check_header(j, "edgeboost-pool", path);
  PoolInfo pool;
  try {
    pool.baseline_macs = j.at("baseline_macs").get<std::uint64_t>();
    pool.baseline_parameters = j.at("baseline_parameters").get<std::uint64_t>();
    for (const auto& e : j.at("learners")) {
      pool.files.push_back(e.at("file").get<std::string>());
      pool.learners.push_back(load_learner((fs::path(dir) / pool.files.back()).string()));
    }
  } catch (const ordered_json::exception& e) {
    fail(ErrorCode::load_error, path + ": " + e.what());
  }
  return pool;
}

void save_ensemble(const ensemble::EnsembleModel& model, const std::vector<std::string>& learner_files,
                   std::uint64_t baseline_macs, const std::string& path) {
  require(learner_files.size() == model.size(), ErrorCode::internal, "one file reference per ensemble learner");
  ordered_json members = ordered_json::array();
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& l = model.learners[i];
    total += l.macs;
    members.push_back({{"file", learner_files[i]},
                       {"pool_index", model.pool_indices[i]},
                       {"id", l.id},
                       {"macs", l.macs},
                       {"eval_accuracy", l.eval_accuracy},
                       {"vote_weight", model.vote_weights[i]}});
  }
  ordered_json j;
  j["format"] = "edgeboost-ensemble";
  j["version"] = kFormatVersion;
  j["ensemble_size"] = model.size();
  j["class_count"] = model.class_count;
  j["chance_level"] = model.chance_level;
  j["total_macs"] = total;
  j["baseline_macs"] = baseline_macs;
  j["members"] = members;
  j["acc_profile"] = model.acc_profile;
  j["delta_acc"] = model.delta_acc;
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  write_json(path, j);
}

EnsembleInfo load_ensemble(const std::string& path) {
  const ordered_json j = parse_json(path);
  check_header(j, "edgeboost-ensemble", path);
  EnsembleInfo info;
  auto& m = info.model;
  try {
    m.class_count = j.at("class_count").get<int>();
    m.chance_level = j.at("chance_level").get<double>();
    info.baseline_macs = j.at("baseline_macs").get<std::uint64_t>();
    const auto base = fs::path(path).parent_path();
    for (const auto& e : j.at("members")) {
      m.learners.push_back(load_learner((base / e.at("file").get<std::string>()).string()));
      m.pool_indices.push_back(e.at("pool_index").get<std::size_t>());
      m.vote_weights.push_back(e.at("vote_weight").get<double>());
    }
    require(j.contains("acc_profile") && j.contains("delta_acc"), ErrorCode::load_error,
            path + ": manifest lacks acc_profile/delta_acc; rebuild the ensemble with build-ensemble");
    m.acc_profile = j.at("acc_profile").get<std::vector<double>>();
    m.delta_acc = j.at("delta_acc").get<std::vector<double>>();
  } catch (const ordered_json::exception& e) {
    fail(ErrorCode::load_error, path + ": " + e.what());
  }
  require(!m.learners.empty(), ErrorCode::load_error, path + ": ensemble has no members");
  require(m.acc_profile.size() == m.size() && m.delta_acc.size() == m.size(), ErrorCode::load_error,
          path + ": acc_profile/delta_acc length does not match the ensemble; rebuild the ensemble");
  return info;
}

}  // namespace edgeboost::io
