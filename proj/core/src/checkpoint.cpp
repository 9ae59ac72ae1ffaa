#include "aorl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "aorl/ddpg.hpp"
#include "aorl/ppo.hpp"
#include "aorl/sac.hpp"

namespace aorl {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint blobs assume little-endian");

std::filesystem::path with_suffix(std::filesystem::path stem, const char* suffix) {
  stem += suffix;
  return stem;
}

Mlp rebuild(const PolicySnapshot& s) {
  Mlp net(s.widths, s.output);
  if (net.parameter_count() != s.params.size()) {
    throw InputError("checkpoint parameter count does not match its layer widths");
  }
  net.parameters() = s.params;
  return net;
}

}  // namespace

std::shared_ptr<Policy> make_policy(const PolicySnapshot& s) {
  if (s.widths.size() < 3) throw InputError("checkpoint needs at least one hidden layer");
  switch (s.kind) {
    case PolicyKind::gaussian: {
      Eigen::VectorXd log_std = s.log_std;
      if (log_std.size() == 0) log_std = Eigen::VectorXd::Zero(s.widths.back());
      return std::make_shared<GaussianPolicy>(rebuild(s), log_std, s.output_gain);
    }
    case PolicyKind::squashed_gaussian:
      return std::make_shared<SquashedGaussianPolicy>(rebuild(s));
    case PolicyKind::deterministic:
      return std::make_shared<DeterministicPolicy>(rebuild(s));
  }
  throw InputError("unknown policy kind");
}

void save_checkpoint(const std::filesystem::path& stem, const PolicySnapshot& s,
                     Algorithm algorithm) {
  nlohmann::json meta;
  meta["format"] = "aorl-checkpoint";
  meta["version"] = 1;
  meta["algorithm"] = to_string(algorithm);
  meta["kind"] = to_string(s.kind);
  meta["widths"] = s.widths;
  meta["output_activation"] = s.output == OutputActivation::tanh ? "tanh" : "linear";
  meta["output_gain"] = s.output_gain;
  meta["parameter_count"] = s.params.size();
  meta["log_std_count"] = s.log_std.size();
  meta["blob"] = with_suffix(stem, ".bin").filename().string();

  std::ofstream js(with_suffix(stem, ".json"));
  if (!js) throw IoError("cannot write checkpoint " + stem.string());
  js << meta.dump(2) << '\n';
  std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw IoError("cannot write checkpoint blob " + stem.string());
  bin.write(reinterpret_cast<const char*>(s.params.data()),
            static_cast<std::streamsize>(s.params.size() * sizeof(double)));
  bin.write(reinterpret_cast<const char*>(s.log_std.data()),
            static_cast<std::streamsize>(s.log_std.size() * sizeof(double)));
  if (!js || !bin) throw IoError("checkpoint write failed: " + stem.string());
}

PolicySnapshot load_checkpoint(const std::filesystem::path& stem) {
  std::ifstream js(with_suffix(stem, ".json"));
  if (!js) throw InputError("missing checkpoint: " + with_suffix(stem, ".json").string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed checkpoint: ") + e.what());
  }
  PolicySnapshot s;
  std::size_t n_params = 0, n_log_std = 0;
  try {
    if (meta.at("format") != "aorl-checkpoint") throw InputError("not an aorl checkpoint");
    s.kind = policy_kind_from_string(meta.at("kind").get<std::string>());
    s.widths = meta.at("widths").get<std::vector<int>>();
    s.output = meta.at("output_activation") == "tanh" ? OutputActivation::tanh
                                                      : OutputActivation::linear;
    s.output_gain = meta.at("output_gain").get<double>();
    n_params = meta.at("parameter_count").get<std::size_t>();
    n_log_std = meta.at("log_std_count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed checkpoint: ") + e.what());
  }
  std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw InputError("missing checkpoint blob: " + with_suffix(stem, ".bin").string());
  s.params.resize(static_cast<Eigen::Index>(n_params));
  s.log_std.resize(static_cast<Eigen::Index>(n_log_std));
  bin.read(reinterpret_cast<char*>(s.params.data()),
           static_cast<std::streamsize>(n_params * sizeof(double)));
  bin.read(reinterpret_cast<char*>(s.log_std.data()),
           static_cast<std::streamsize>(n_log_std * sizeof(double)));
  if (!bin) throw InputError("checkpoint blob is truncated: " + stem.string());
  if (bin.peek() != std::char_traits<char>::eof()) {
    throw InputError("checkpoint blob has trailing data: " + stem.string());
  }
  make_policy(s);  // validates the layout
  return s;
}

}  // namespace aorl
