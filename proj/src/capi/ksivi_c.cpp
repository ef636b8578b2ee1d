#include "ksivi/ksivi.h"

#include <cstring>
#include <exception>
#include <string>

#include "ksivi/config.hpp"
#include "ksivi/error.hpp"
#include "ksivi/estimators.hpp"
#include "ksivi/harness.hpp"
#include "ksivi/io.hpp"
#include "ksivi/metrics.hpp"
#include "ksivi/rng.hpp"
#include "ksivi/trainer.hpp"

struct ksivi_config {
  ksivi::KeyValueDoc doc;
  std::filesystem::path base_dir;

  ksivi::ExperimentConfig resolve() const {
    auto cfg = ksivi::config_from_doc(doc, base_dir);
    ksivi::apply_environment(cfg);
    return cfg;
  }
};

struct ksivi_target {
  ksivi::TargetPtr target;
};

struct ksivi_model {
  ksivi::SIVParams params;
};

namespace {

thread_local std::string g_last_error;

ksivi_status fail(ksivi_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Maps the library's exception types onto status codes.
template <typename F>
ksivi_status guarded(F&& fn) {
  g_last_error.clear();
  try {
    fn();
    return KSIVI_OK;
  } catch (const ksivi::DimensionError& e) {
    return fail(KSIVI_ERR_DIMENSION, e.what());
  } catch (const ksivi::ConfigError& e) {
    return fail(KSIVI_ERR_CONFIG, e.what());
  } catch (const ksivi::IoError& e) {
    return fail(KSIVI_ERR_IO, e.what());
  } catch (const ksivi::NumericError& e) {
    return fail(KSIVI_ERR_NUMERIC, e.what());
  } catch (const ksivi::DegenerateSamples& e) {
    return fail(KSIVI_ERR_NUMERIC, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(KSIVI_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(KSIVI_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(KSIVI_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(KSIVI_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(',', start);
    std::string item = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!item.empty()) out.push_back(item);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

extern "C" {

const char* ksivi_version(void) {
  static const std::string v = "0.1.0+" + ksivi::build_id();
  return v.c_str();
}

const char* ksivi_last_error(void) { return g_last_error.c_str(); }

const char* ksivi_status_name(ksivi_status status) {
  switch (status) {
    case KSIVI_OK: return "ok";
    case KSIVI_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case KSIVI_ERR_DIMENSION: return "dimension";
    case KSIVI_ERR_CONFIG: return "config";
    case KSIVI_ERR_IO: return "io";
    case KSIVI_ERR_NUMERIC: return "numeric";
    case KSIVI_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void ksivi_string_free(char* s) { std::free(s); }

ksivi_status ksivi_config_load(const char* path, ksivi_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto file = ksivi::KeyValueDoc::load(path);
    auto cfg = std::make_unique<ksivi_config>();
    const std::string preset = file.get_string("preset", "");
    if (!preset.empty()) cfg->doc = ksivi::preset_doc(preset);
    cfg->doc.merge(file);
    cfg->base_dir = std::filesystem::path(path).parent_path();
    cfg->resolve();  // surfaces parse errors now
    *out = cfg.release();
  });
}

ksivi_status ksivi_config_from_preset(const char* name, ksivi_config** out) {
  return guarded([&] {
    require(name && out, "null argument");
    auto cfg = std::make_unique<ksivi_config>();
    cfg->doc = ksivi::preset_doc(name);
    *out = cfg.release();
  });
}

ksivi_status ksivi_config_set(ksivi_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg && key && value, "null argument");
    ksivi::KeyValueDoc next = cfg->doc;
    next.set(key, value);
    ksivi::config_from_doc(next, cfg->base_dir);
    cfg->doc = std::move(next);
  });
}

ksivi_status ksivi_config_dump(const ksivi_config* cfg, char** out_text) {
  return guarded([&] {
    require(cfg && out_text, "null argument");
    *out_text = dup_string(cfg->resolve().to_doc().dump());
  });
}

ksivi_status ksivi_config_validate(const ksivi_config* cfg) {
  return guarded([&] {
    require(cfg, "null argument");
    cfg->resolve().validate();
  });
}

void ksivi_config_free(ksivi_config* cfg) { delete cfg; }

ksivi_status ksivi_preset_names(char** out_text) {
  return guarded([&] {
    require(out_text, "null argument");
    std::string s;
    for (const auto& n : ksivi::preset_names()) s += n + "\n";
    *out_text = dup_string(s);
  });
}

ksivi_status ksivi_train(const ksivi_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(cfg, "null argument");
    auto c = cfg->resolve();
    if (out_dir) c.output_dir = out_dir;
    ksivi::run_train(c);
  });
}

ksivi_status ksivi_sample_ground_truth(const ksivi_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(cfg, "null argument");
    auto c = cfg->resolve();
    if (out_dir) c.output_dir = out_dir;
    ksivi::run_ground_truth(c);
  });
}

ksivi_status ksivi_evaluate(const char* samples_a, const char* samples_b, const char* metrics, int n_proj, int knn_k,
                            uint64_t seed, char** out_json) {
  return guarded([&] {
    require(samples_a && samples_b && out_json, "null argument");
    ksivi::EvaluateSpec spec;
    if (metrics && *metrics) spec.metrics = split_commas(metrics);
    if (n_proj > 0) spec.n_proj = n_proj;
    if (knn_k > 0) spec.knn_k = knn_k;
    spec.seed = seed;
    *out_json = dup_string(ksivi::evaluate_files(samples_a, samples_b, spec).dump(2));
  });
}

ksivi_status ksivi_diagnose(const char* checkpoint, int n_probes, uint64_t seed, int zero_probes, char** out_json) {
  return guarded([&] {
    require(checkpoint && out_json, "null argument");
    *out_json = dup_string(ksivi::diagnose_checkpoint(checkpoint, n_probes, seed, zero_probes != 0).dump(2));
  });
}

ksivi_status ksivi_generate_waveform(const char* path, int n_rows, uint64_t seed) {
  return guarded([&] {
    require(path, "null argument");
    ksivi::write_waveform_dataset(path, n_rows, seed);
  });
}

ksivi_status ksivi_generate_cd_observations(const char* path, int n_steps, uint64_t seed) {
  return guarded([&] {
    require(path, "null argument");
    ksivi::DiffusionSetup setup;
    setup.n_steps = n_steps;
    ksivi::write_cd_observations(path, ksivi::generate_cd_observations(setup, seed).observations);
  });
}

ksivi_status ksivi_target_from_config(const ksivi_config* cfg, ksivi_target** out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    const auto c = cfg->resolve();
    *out = new ksivi_target{ksivi::build_target(c.target, c.base_dir)};
  });
}

int ksivi_target_dim(const ksivi_target* t) { return t ? t->target->dim() : -1; }

ksivi_status ksivi_target_log_density(const ksivi_target* t, const double* x, double* out) {
  return guarded([&] {
    require(t && x && out, "null argument");
    *out = t->target->log_density(Eigen::Map<const Eigen::VectorXd>(x, t->target->dim()));
  });
}

ksivi_status ksivi_target_score(const ksivi_target* t, const double* x, double* out) {
  return guarded([&] {
    require(t && x && out, "null argument");
    const int d = t->target->dim();
    Eigen::Map<Eigen::VectorXd>(out, d) = t->target->score(Eigen::Map<const Eigen::VectorXd>(x, d));
  });
}

ksivi_status ksivi_target_hvp(const ksivi_target* t, const double* x, const double* v, double* out) {
  return guarded([&] {
    require(t && x && v && out, "null argument");
    const int d = t->target->dim();
    Eigen::Map<Eigen::VectorXd>(out, d) =
        t->target->hvp(Eigen::Map<const Eigen::VectorXd>(x, d), Eigen::Map<const Eigen::VectorXd>(v, d));
  });
}

void ksivi_target_free(ksivi_target* t) { delete t; }

ksivi_status ksivi_model_load(const char* checkpoint, ksivi_model** out) {
  return guarded([&] {
    require(checkpoint && out, "null argument");
    *out = new ksivi_model{ksivi::load_checkpoint(checkpoint)};
  });
}

int ksivi_model_dim(const ksivi_model* m) { return m ? m->params.dim() : -1; }
int ksivi_model_mixing_dim(const ksivi_model* m) { return m ? m->params.mixing_dim() : -1; }

ksivi_status ksivi_model_sample(const ksivi_model* m, int n, uint64_t seed, double* out) {
  return guarded([&] {
    require(m && out && n >= 1, "invalid argument");
    ksivi::Rng rng(seed);
    const Eigen::MatrixXd x = ksivi::siv_draw(m->params, n, rng);
    // column-major d x n is row-major n x d
    std::memcpy(out, x.data(), sizeof(double) * static_cast<std::size_t>(x.size()));
  });
}

ksivi_status ksivi_model_save(const ksivi_model* m, const char* checkpoint) {
  return guarded([&] {
    require(m && checkpoint, "null argument");
    ksivi::save_checkpoint(checkpoint, m->params);
  });
}

ksivi_status ksivi_model_ksd2(const ksivi_model* m, const ksivi_target* t, int n, uint64_t seed, int ustat,
                              double* out) {
  return guarded([&] {
    require(m && t && out && n >= 2, "invalid argument");
    ksivi::Rng rng(seed);
    const auto b1 = ksivi::siv_sample_batch(m->params, n, rng);
    ksivi::KernelSpec k;
    k.bandwidth = ksivi::median_bandwidth(b1.x);
    if (ustat) {
      *out = ksivi::ksd2_estimate(m->params, *t->target, k, b1, nullptr, ksivi::EstimatorKind::ustat, 1.0);
    } else {
      const auto b2 = ksivi::siv_sample_batch(m->params, n, rng);
      *out = ksivi::ksd2_estimate(m->params, *t->target, k, b1, &b2, ksivi::EstimatorKind::vanilla, 1.0);
    }
  });
}

void ksivi_model_free(ksivi_model* m) { delete m; }

}  // extern "C"
