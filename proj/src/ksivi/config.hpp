#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ksivi/diffnet.hpp"
#include "ksivi/samplers.hpp"
#include "ksivi/targets.hpp"
#include "ksivi/trainer.hpp"

namespace ksivi {

/// Flat key/value document: `[section]` headers prefix following keys with
/// "section.". Values keep their source text; typed accessors parse on read.
class KeyValueDoc {
 public:
  static KeyValueDoc parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueDoc load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& raw_value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }
  void merge(const KeyValueDoc& other);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

  /// Sectioned text that parses back to the same values.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

struct TargetSpec {
  std::string name = "banana";  // banana | multimodal | xshaped | gaussian | student_product | blr | conditioned_diffusion
  // gaussian
  std::vector<double> mean;
  std::vector<double> stddev;
  // student_product
  std::vector<double> nu;
  std::vector<double> scale;
  // blr: a CSV path, or a synthetic waveform when empty
  std::string data;
  int waveform_rows = 400;
  std::uint64_t waveform_seed = 2024;
  double prior_precision = 0.01;
  // conditioned_diffusion: an observations CSV, or simulated from observation_seed when empty
  DiffusionSetup diffusion;
  std::string observations;
  std::uint64_t observation_seed = 7;
};

struct SamplerSpec {
  std::string method = "sgld";  // sgld | mala
  SamplerConfig config;
};

struct EvaluateSpec {
  std::vector<std::string> metrics = {"sliced_wd", "mmd", "kl_knn"};
  int n_proj = 128;
  int knn_k = 1;
  std::uint64_t seed = 0;
  KernelSpec mmd_kernel;  // rbf with median bandwidth when mmd_bandwidth <= 0
  double mmd_bandwidth = 0.0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string preset;
  TargetSpec target;
  NetArch arch{{3, 50, 50, 2}};
  double initial_sigma = 1.0;
  std::uint64_t init_seed = 1;
  NetInit init = NetInit::he_normal;
  TrainConfig train;
  int eval_samples = 1000;
  SamplerSpec sampler;
  EvaluateSpec evaluate;
  std::string output_dir = "runs/experiment";
  std::uint64_t seed = 0;
  int threads = 1;
  bool reproducible = true;
  std::filesystem::path base_dir;  // relative data paths resolve against this

  /// Throws ConfigError naming every failing field path.
  void validate() const;
  KeyValueDoc to_doc() const;
};

ExperimentConfig config_from_doc(const KeyValueDoc& doc, const std::filesystem::path& base_dir = {});
/// Reads a config file; a `preset` key seeds defaults that the file overrides.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

std::vector<std::string> preset_names();
KeyValueDoc preset_doc(const std::string& name);
ExperimentConfig preset_config(const std::string& name);

/// Applies KSIVI_THREADS and KSIVI_OUTPUT_ROOT when set.
void apply_environment(ExperimentConfig& cfg);

TargetPtr build_target(const TargetSpec& spec, const std::filesystem::path& base_dir = {});
std::filesystem::path resolve_path(const std::filesystem::path& base_dir, const std::string& p);

}  // namespace ksivi
