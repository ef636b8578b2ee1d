#include "ksivi/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ksivi/error.hpp"

namespace ksivi {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

std::string unquote(const std::string& raw) {
  const std::string t = trim(raw);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') return t.substr(1, t.size() - 2);
  return t;
}

std::vector<std::string> split_array(const std::string& raw, const std::string& key) {
  const std::string t = trim(raw);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') throw ConfigError(key + ": expected an array [a, b, ...]");
  std::vector<std::string> items;
  std::string inner = t.substr(1, t.size() - 2);
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

double to_double(const std::string& raw, const std::string& key) {
  const std::string t = unquote(raw);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + t + "'");
  }
  if (pos != t.size()) throw ConfigError(key + ": expected a number, got '" + t + "'");
  return v;
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename T>
std::string array_text(const std::vector<T>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_same_v<T, std::string>) {
      s += quote(v[i]);
    } else {
      s += num(static_cast<double>(v[i]));
    }
  }
  return s + "]";
}

}  // namespace

// ---------------------------------------------------------------------------
// KeyValueDoc

KeyValueDoc KeyValueDoc::parse(const std::string& text, const std::string& origin) {
  KeyValueDoc doc;
  std::stringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(strip_comment(line));
    if (t.empty()) continue;
    if (t.front() == '[' && t.back() == ']' && t.find('=') == std::string::npos) {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    doc.set(section.empty() ? key : section + "." + key, value);
  }
  return doc;
}

KeyValueDoc KeyValueDoc::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void KeyValueDoc::set(const std::string& key, const std::string& raw_value) { values_[key] = trim(raw_value); }

void KeyValueDoc::merge(const KeyValueDoc& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::string KeyValueDoc::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : unquote(it->second);
}

double KeyValueDoc::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : to_double(it->second, key);
}

std::int64_t KeyValueDoc::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const double v = to_double(it->second, key);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError(key + ": expected an integer");
  return static_cast<std::int64_t>(v);
}

bool KeyValueDoc::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string v = unquote(it->second);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false");
}

std::vector<double> KeyValueDoc::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const auto& item : split_array(it->second, key)) out.push_back(to_double(item, key));
  return out;
}

std::vector<std::string> KeyValueDoc::get_strings(const std::string& key,
                                                  const std::vector<std::string>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> out;
  for (const auto& item : split_array(it->second, key)) out.push_back(unquote(item));
  return out;
}

std::string KeyValueDoc::dump() const {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
  for (const auto& [k, v] : values_) {
    const auto dot = k.find('.');
    if (dot == std::string::npos) {
      sections[""].emplace_back(k, v);
    } else {
      sections[k.substr(0, dot)].emplace_back(k.substr(dot + 1), v);
    }
  }
  std::ostringstream out;
  for (const auto& [k, v] : sections[""]) out << k << " = " << v << "\n";
  for (const auto& [sec, kvs] : sections) {
    if (sec.empty()) continue;
    out << "\n[" << sec << "]\n";
    for (const auto& [k, v] : kvs) out << k << " = " << v << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// ExperimentConfig

std::filesystem::path resolve_path(const std::filesystem::path& base_dir, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base_dir.empty()) return path;
  return base_dir / path;
}

ExperimentConfig config_from_doc(const KeyValueDoc& doc, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.base_dir = base_dir;
  c.name = doc.get_string("name", c.name);
  c.preset = doc.get_string("preset", "");
  c.seed = static_cast<std::uint64_t>(doc.get_int("seed", 0));
  c.threads = static_cast<int>(doc.get_int("threads", 1));
  c.reproducible = doc.get_bool("reproducible", true);
  c.output_dir = doc.get_string("output_dir", "runs/" + c.name);

  auto& t = c.target;
  t.name = doc.get_string("target.name", t.name);
  t.mean = doc.get_doubles("target.mean", {});
  t.stddev = doc.get_doubles("target.stddev", {});
  t.nu = doc.get_doubles("target.nu", {2.0, 2.0});
  t.scale = doc.get_doubles("target.scale", {1.0, 1.0});
  t.data = doc.get_string("target.data", "");
  t.waveform_rows = static_cast<int>(doc.get_int("target.waveform_rows", t.waveform_rows));
  t.waveform_seed = static_cast<std::uint64_t>(doc.get_int("target.waveform_seed", static_cast<std::int64_t>(t.waveform_seed)));
  t.prior_precision = doc.get_double("target.prior_precision", t.prior_precision);
  t.diffusion.dt = doc.get_double("target.dt", t.diffusion.dt);
  t.diffusion.n_steps = static_cast<int>(doc.get_int("target.n_steps", t.diffusion.n_steps));
  t.diffusion.drift = doc.get_double("target.drift", t.diffusion.drift);
  t.diffusion.obs_every = static_cast<int>(doc.get_int("target.obs_every", t.diffusion.obs_every));
  t.diffusion.obs_sigma = doc.get_double("target.obs_sigma", t.diffusion.obs_sigma);
  t.observations = doc.get_string("target.observations", "");
  t.observation_seed =
      static_cast<std::uint64_t>(doc.get_int("target.observation_seed", static_cast<std::int64_t>(t.observation_seed)));

  std::vector<int> widths;
  for (double w : doc.get_doubles("model.widths", {3, 50, 50, 2})) widths.push_back(static_cast<int>(w));
  c.arch.widths = widths;
  c.initial_sigma = doc.get_double("model.initial_sigma", c.initial_sigma);
  c.init_seed = static_cast<std::uint64_t>(doc.get_int("model.init_seed", static_cast<std::int64_t>(c.seed + 1)));
  c.init = net_init_from_string(doc.get_string("model.init", to_string(c.init)));

  auto& tr = c.train;
  tr.iterations = doc.get_int("train.iterations", tr.iterations);
  tr.batch_size = static_cast<int>(doc.get_int("train.batch_size", tr.batch_size));
  tr.learning_rate = doc.get_double("train.learning_rate", tr.learning_rate);
  tr.estimator = estimator_kind_from_string(doc.get_string("train.estimator", "vanilla"));
  tr.kernel.family = kernel_family_from_string(doc.get_string("train.kernel", "rbf"));
  tr.kernel.bandwidth = doc.get_double("train.bandwidth", tr.kernel.bandwidth);
  tr.kernel.imq_c = doc.get_double("train.imq_c", tr.kernel.imq_c);
  tr.kernel.riesz_eps = doc.get_double("train.riesz_eps", tr.kernel.riesz_eps);
  tr.kernel.riesz_anchored = doc.get_bool("train.riesz_anchored", tr.kernel.riesz_anchored);
  tr.bandwidth_rule = bandwidth_rule_from_string(doc.get_string("train.bandwidth_rule", "median"));
  tr.anneal.enabled = doc.get_bool("train.anneal", false);
  tr.anneal.beta0 = doc.get_double("train.anneal_beta0", tr.anneal.beta0);
  tr.anneal.ramp_iterations = doc.get_int("train.anneal_iterations", tr.iterations / 2);
  tr.reg_lambda = doc.get_double("train.reg_lambda", tr.reg_lambda);
  tr.reg_kind = reg_kind_from_string(doc.get_string("train.reg_kind", to_string(tr.reg_kind)));
  tr.clip_norm = doc.get_double("train.clip_norm", tr.clip_norm);
  tr.seed = static_cast<std::uint64_t>(doc.get_int("train.seed", static_cast<std::int64_t>(c.seed)));
  tr.trace_every = static_cast<int>(doc.get_int("train.trace_every", tr.trace_every));
  tr.diagnostic_every = static_cast<int>(doc.get_int("train.diagnostic_every", tr.diagnostic_every));
  tr.diagnostic_probes = static_cast<int>(doc.get_int("train.diagnostic_probes", tr.diagnostic_probes));
  c.eval_samples = static_cast<int>(doc.get_int("train.eval_samples", c.eval_samples));
  tr.record_wallclock = !c.reproducible;

  auto& s = c.sampler;
  s.method = doc.get_string("sampler.method", s.method);
  s.config.n_particles = static_cast<int>(doc.get_int("sampler.n_particles", s.config.n_particles));
  s.config.n_steps = doc.get_int("sampler.n_steps", s.config.n_steps);
  s.config.step_size = doc.get_double("sampler.step_size", s.config.step_size);
  s.config.burn_in = doc.get_int("sampler.burn_in", s.config.burn_in);
  s.config.thin = static_cast<int>(doc.get_int("sampler.thin", s.config.thin));
  s.config.seed = static_cast<std::uint64_t>(doc.get_int("sampler.seed", static_cast<std::int64_t>(c.seed)));
  s.config.threads = c.threads;

  auto& e = c.evaluate;
  e.metrics = doc.get_strings("evaluate.metrics", e.metrics);
  e.n_proj = static_cast<int>(doc.get_int("evaluate.n_proj", e.n_proj));
  e.knn_k = static_cast<int>(doc.get_int("evaluate.knn_k", e.knn_k));
  e.seed = static_cast<std::uint64_t>(doc.get_int("evaluate.seed", static_cast<std::int64_t>(c.seed)));
  e.mmd_bandwidth = doc.get_double("evaluate.mmd_bandwidth", e.mmd_bandwidth);
  return c;
}

namespace {

int expected_target_dim(const TargetSpec& t) {
  if (t.name == "banana" || t.name == "multimodal" || t.name == "xshaped") return 2;
  if (t.name == "gaussian") return static_cast<int>(t.mean.size());
  if (t.name == "student_product") return static_cast<int>(t.nu.size());
  if (t.name == "blr") return 22;
  if (t.name == "conditioned_diffusion") return t.diffusion.n_steps;
  return -1;
}

}  // namespace

void ExperimentConfig::validate() const {
  std::vector<std::string> errors;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };
  auto guard = [&](auto&& fn) {
    try {
      fn();
    } catch (const std::exception& ex) {
      errors.emplace_back(ex.what());
    }
  };

  const int tdim = expected_target_dim(target);
  check(tdim != -1, "target.name: unknown target '" + target.name + "'");
  guard([&] { arch.validate(); });
  if (tdim > 0 && !arch.widths.empty())
    check(arch.output_dim() == tdim, "model.widths: output width " + std::to_string(arch.output_dim()) +
                                         " does not match target dimension " + std::to_string(tdim));
  check(initial_sigma > 0.0, "model.initial_sigma: must be positive");
  if (target.name == "gaussian")
    check(target.mean.size() == target.stddev.size() && !target.mean.empty(),
          "target.stddev: needs one entry per target.mean entry");
  if (target.name == "student_product")
    check(target.nu.size() == target.scale.size(), "target.scale: needs one entry per target.nu entry");
  if (target.name == "blr" && !target.data.empty())
    check(std::filesystem::exists(resolve_path(base_dir, target.data)),
          "target.data: file '" + target.data + "' does not exist");
  if (target.name == "conditioned_diffusion" && !target.observations.empty())
    check(std::filesystem::exists(resolve_path(base_dir, target.observations)),
          "target.observations: file '" + target.observations + "' does not exist");
  guard([&] { train.validate(); });
  check(eval_samples >= 2, "train.eval_samples: must be >= 2");
  check(sampler.method == "sgld" || sampler.method == "mala", "sampler.method: expected sgld or mala");
  guard([&] { sampler.config.validate(); });
  check(threads >= 1, "threads: must be >= 1");
  for (const auto& m : evaluate.metrics)
    check(m == "sliced_wd" || m == "mmd" || m == "kl_knn" || m == "corr", "evaluate.metrics: unknown metric '" + m + "'");
  check(evaluate.n_proj >= 1, "evaluate.n_proj: must be >= 1");
  check(evaluate.knn_k >= 1, "evaluate.knn_k: must be >= 1");

  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
}

KeyValueDoc ExperimentConfig::to_doc() const {
  KeyValueDoc d;
  d.set("name", quote(name));
  if (!preset.empty()) d.set("preset", quote(preset));
  d.set("seed", std::to_string(seed));
  d.set("threads", std::to_string(threads));
  d.set("reproducible", reproducible ? "true" : "false");
  d.set("output_dir", quote(output_dir));

  d.set("target.name", quote(target.name));
  if (target.name == "gaussian") {
    d.set("target.mean", array_text(target.mean));
    d.set("target.stddev", array_text(target.stddev));
  }
  if (target.name == "student_product") {
    d.set("target.nu", array_text(target.nu));
    d.set("target.scale", array_text(target.scale));
  }
  if (target.name == "blr") {
    if (!target.data.empty()) d.set("target.data", quote(target.data));
    d.set("target.waveform_rows", std::to_string(target.waveform_rows));
    d.set("target.waveform_seed", std::to_string(target.waveform_seed));
    d.set("target.prior_precision", num(target.prior_precision));
  }
  if (target.name == "conditioned_diffusion") {
    d.set("target.dt", num(target.diffusion.dt));
    d.set("target.n_steps", std::to_string(target.diffusion.n_steps));
    d.set("target.drift", num(target.diffusion.drift));
    d.set("target.obs_every", std::to_string(target.diffusion.obs_every));
    d.set("target.obs_sigma", num(target.diffusion.obs_sigma));
    if (!target.observations.empty()) d.set("target.observations", quote(target.observations));
    d.set("target.observation_seed", std::to_string(target.observation_seed));
  }

  d.set("model.widths", array_text(arch.widths));
  d.set("model.initial_sigma", num(initial_sigma));
  d.set("model.init_seed", std::to_string(init_seed));
  d.set("model.init", quote(to_string(init)));

  d.set("train.iterations", std::to_string(train.iterations));
  d.set("train.batch_size", std::to_string(train.batch_size));
  d.set("train.learning_rate", num(train.learning_rate));
  d.set("train.estimator", quote(to_string(train.estimator)));
  d.set("train.kernel", quote(to_string(train.kernel.family)));
  d.set("train.bandwidth", num(train.kernel.bandwidth));
  d.set("train.imq_c", num(train.kernel.imq_c));
  d.set("train.riesz_eps", num(train.kernel.riesz_eps));
  d.set("train.riesz_anchored", train.kernel.riesz_anchored ? "true" : "false");
  d.set("train.bandwidth_rule", quote(to_string(train.bandwidth_rule)));
  d.set("train.anneal", train.anneal.enabled ? "true" : "false");
  d.set("train.anneal_beta0", num(train.anneal.beta0));
  d.set("train.anneal_iterations", std::to_string(train.anneal.ramp_iterations));
  d.set("train.reg_lambda", num(train.reg_lambda));
  d.set("train.reg_kind", quote(to_string(train.reg_kind)));
  d.set("train.clip_norm", num(train.clip_norm));
  d.set("train.seed", std::to_string(train.seed));
  d.set("train.trace_every", std::to_string(train.trace_every));
  d.set("train.diagnostic_every", std::to_string(train.diagnostic_every));
  d.set("train.diagnostic_probes", std::to_string(train.diagnostic_probes));
  d.set("train.eval_samples", std::to_string(eval_samples));

  d.set("sampler.method", quote(sampler.method));
  d.set("sampler.n_particles", std::to_string(sampler.config.n_particles));
  d.set("sampler.n_steps", std::to_string(sampler.config.n_steps));
  d.set("sampler.step_size", num(sampler.config.step_size));
  d.set("sampler.burn_in", std::to_string(sampler.config.burn_in));
  d.set("sampler.thin", std::to_string(sampler.config.thin));
  d.set("sampler.seed", std::to_string(sampler.config.seed));

  d.set("evaluate.metrics", array_text(evaluate.metrics));
  d.set("evaluate.n_proj", std::to_string(evaluate.n_proj));
  d.set("evaluate.knn_k", std::to_string(evaluate.knn_k));
  d.set("evaluate.seed", std::to_string(evaluate.seed));
  d.set("evaluate.mmd_bandwidth", num(evaluate.mmd_bandwidth));
  return d;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  KeyValueDoc file = KeyValueDoc::load(path);
  KeyValueDoc doc;
  const std::string preset = file.get_string("preset", "");
  if (!preset.empty()) doc = preset_doc(preset);
  doc.merge(file);
  return config_from_doc(doc, path.parent_path());
}

void apply_environment(ExperimentConfig& cfg) {
  if (const char* t = std::getenv("KSIVI_THREADS"); t && *t) {
    const int n = std::atoi(t);
    if (n < 1) throw ConfigError("KSIVI_THREADS must be a positive integer");
    cfg.threads = n;
    cfg.sampler.config.threads = n;
  }
  if (const char* root = std::getenv("KSIVI_OUTPUT_ROOT"); root && *root) {
    const std::filesystem::path out(cfg.output_dir);
    if (out.is_relative()) cfg.output_dir = (std::filesystem::path(root) / out).string();
  }
}

// ---------------------------------------------------------------------------
// Presets

namespace {

struct PresetEntry {
  std::string name;
  std::string text;
};

std::string toy_preset(const std::string& name, const std::string& target, double sigma, const std::string& extra) {
  return "name = \"" + name + "\"\noutput_dir = \"runs/" + name + "\"\n[target]\nname = \"" + target +
         "\"\n[model]\nwidths = [3, 50, 50, 2]\ninitial_sigma = " + num(sigma) +
         "\n[train]\niterations = 50000\nbatch_size = 100\nlearning_rate = 0.001\nestimator = \"vanilla\"\n"
         "kernel = \"rbf\"\nbandwidth_rule = \"median\"\ntrace_every = 1\neval_samples = 1000\n" +
         extra + "[evaluate]\nmetrics = [\"sliced_wd\", \"mmd\", \"kl_knn\"]\n";
}

std::string student_preset(int width, const std::string& kernel) {
  const std::string name = "student-product-w" + std::to_string(width) + "-" + kernel;
  const std::string family = kernel == "gaussian" ? "rbf" : "riesz";
  return "name = \"" + name + "\"\noutput_dir = \"runs/" + name +
         "\"\n[target]\nname = \"student_product\"\nnu = [2, 2]\nscale = [" + std::to_string(width) + ", " +
         std::to_string(width) +
         "]\n[model]\nwidths = [3, 50, 50, 2]\ninitial_sigma = 1\n[train]\niterations = 20000\nbatch_size = 100\n"
         "learning_rate = 0.001\nestimator = \"vanilla\"\nkernel = \"" +
         family +
         "\"\n" + (kernel == "gaussian" ? "" : "riesz_anchored = true\n") +
         "bandwidth_rule = \"median\"\nreg_lambda = 0.001\ntrace_every = 10\neval_samples = 1000\n"
         "[evaluate]\nmetrics = [\"sliced_wd\"]\n";
}

std::string cd_preset(int dim) {
  const std::string name = "cd-dim" + std::to_string(dim);
  return "name = \"" + name + "\"\noutput_dir = \"runs/" + name +
         "\"\n[target]\nname = \"conditioned_diffusion\"\ndt = 0.01\nn_steps = " + std::to_string(dim) +
         "\ndrift = 10\nobs_every = 5\nobs_sigma = 0.1\nobservation_seed = 7\n[model]\nwidths = [" +
         std::to_string(dim) + ", 128, 128, " + std::to_string(dim) +
         "]\ninitial_sigma = 0.36787944117144233\ninit = \"uniform\"\n[train]\niterations = 100000\nbatch_size = 128\n"
         "learning_rate = 0.0002\nestimator = \"vanilla\"\nkernel = \"rbf\"\nbandwidth_rule = \"median\"\n"
         "trace_every = 10\neval_samples = 1000\n[sampler]\nmethod = \"sgld\"\nn_particles = 1000\n"
         "n_steps = 100000\nstep_size = 0.0001\nburn_in = 0\n[evaluate]\nmetrics = [\"sliced_wd\"]\n";
}

const std::vector<PresetEntry>& presets() {
  static const std::vector<PresetEntry> table = [] {
    std::vector<PresetEntry> t;
    t.push_back({"toy-banana", toy_preset("toy-banana", "banana", 0.5, "")});
    t.push_back({"toy-multimodal",
                 toy_preset("toy-multimodal", "multimodal", 1.0,
                            "anneal = true\nanneal_beta0 = 0.2\nanneal_iterations = 25000\n")});
    t.push_back({"toy-xshaped", toy_preset("toy-xshaped", "xshaped", 1.0, "")});
    for (int w : {5, 8, 10})
      for (const char* k : {"gaussian", "riesz"})
        t.push_back({"student-product-w" + std::to_string(w) + "-" + k, student_preset(w, k)});
    t.push_back({"blr-waveform",
                 "name = \"blr-waveform\"\noutput_dir = \"runs/blr-waveform\"\n[target]\nname = \"blr\"\n"
                 "waveform_rows = 400\nwaveform_seed = 2024\nprior_precision = 0.01\n[model]\n"
                 "widths = [10, 100, 100, 22]\ninitial_sigma = 0.0820849986238988\ninit = \"uniform\"\n[train]\n"
                 "iterations = 20000\nbatch_size = 100\nlearning_rate = 0.001\nestimator = \"vanilla\"\n"
                 "kernel = \"riesz\"\nriesz_anchored = true\nriesz_eps = 0.01\n"
                 "bandwidth_rule = \"median\"\ntrace_every = 10\neval_samples = 1000\n[sampler]\n"
                 "method = \"sgld\"\nn_particles = 1000\nn_steps = 400000\nstep_size = 0.0001\nburn_in = 0\n"
                 "[evaluate]\nmetrics = [\"sliced_wd\", \"kl_knn\", \"corr\"]\n"});
    for (int dim : {50, 100, 200}) t.push_back({"cd-dim" + std::to_string(dim), cd_preset(dim)});
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : presets()) names.push_back(p.name);
  return names;
}

KeyValueDoc preset_doc(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) {
      KeyValueDoc d = KeyValueDoc::parse(p.text, "preset:" + name);
      d.set("preset", quote(name));
      return d;
    }
  throw ConfigError("preset: unknown preset '" + name + "'");
}

ExperimentConfig preset_config(const std::string& name) { return config_from_doc(preset_doc(name)); }

TargetPtr build_target(const TargetSpec& spec, const std::filesystem::path& base_dir) {
  if (spec.name == "banana") return std::make_shared<BananaTarget>();
  if (spec.name == "multimodal") return std::make_shared<GaussianMixtureTarget>(GaussianMixtureTarget::multimodal());
  if (spec.name == "xshaped") return std::make_shared<GaussianMixtureTarget>(GaussianMixtureTarget::xshaped());
  if (spec.name == "gaussian")
    return std::make_shared<GaussianMixtureTarget>(GaussianMixtureTarget::diagonal_gaussian(
        Eigen::Map<const Eigen::VectorXd>(spec.mean.data(), static_cast<Eigen::Index>(spec.mean.size())),
        Eigen::Map<const Eigen::VectorXd>(spec.stddev.data(), static_cast<Eigen::Index>(spec.stddev.size()))));
  if (spec.name == "student_product")
    return std::make_shared<StudentTProductTarget>(
        Eigen::Map<const Eigen::VectorXd>(spec.nu.data(), static_cast<Eigen::Index>(spec.nu.size())),
        Eigen::Map<const Eigen::VectorXd>(spec.scale.data(), static_cast<Eigen::Index>(spec.scale.size())));
  if (spec.name == "blr") {
    if (spec.data.empty())
      return std::make_shared<LogisticRegressionTarget>(
          make_waveform_target(spec.waveform_rows, spec.waveform_seed, spec.prior_precision));
    return std::make_shared<LogisticRegressionTarget>(
        load_blr_dataset(resolve_path(base_dir, spec.data), 21, spec.prior_precision));
  }
  if (spec.name == "conditioned_diffusion") {
    DiffusionObservations obs = spec.observations.empty()
                                    ? generate_cd_observations(spec.diffusion, spec.observation_seed).observations
                                    : read_cd_observations(resolve_path(base_dir, spec.observations));
    return std::make_shared<ConditionedDiffusionTarget>(spec.diffusion, std::move(obs));
  }
  throw ConfigError("target.name: unknown target '" + spec.name + "'");
}

}  // namespace ksivi
