#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "ksivi/ksivi.h"

namespace fs = std::filesystem;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  ksivi_string_free(s);
  return out;
}

struct Config {
  ksivi_config* p = nullptr;
  ~Config() { ksivi_config_free(p); }
};

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("ksivi_capi_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(ksivi_version()) > 0);
  CHECK(std::string(ksivi_status_name(KSIVI_OK)) == "ok");
  CHECK(std::string(ksivi_status_name(KSIVI_ERR_CONFIG)) != "ok");
}

TEST_CASE("errors map to status codes with a message") {
  ksivi_config* cfg = nullptr;
  CHECK(ksivi_config_from_preset("no-such-preset", &cfg) == KSIVI_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::string(ksivi_last_error()).find("no-such-preset") != std::string::npos);
  CHECK(ksivi_config_from_preset(nullptr, &cfg) == KSIVI_ERR_INVALID_ARGUMENT);
  CHECK(ksivi_config_load("/nonexistent/dir/run.toml", &cfg) == KSIVI_ERR_IO);
  ksivi_model* m = nullptr;
  CHECK(ksivi_model_load("/nonexistent/ckpt.bin", &m) == KSIVI_ERR_IO);
}

TEST_CASE("config set, dump and validate") {
  Config c;
  REQUIRE(ksivi_config_from_preset("toy-banana", &c.p) == KSIVI_OK);
  CHECK(ksivi_config_validate(c.p) == KSIVI_OK);
  REQUIRE(ksivi_config_set(c.p, "train.iterations", "7") == KSIVI_OK);
  char* text = nullptr;
  REQUIRE(ksivi_config_dump(c.p, &text) == KSIVI_OK);
  CHECK(take(text).find("iterations = 7") != std::string::npos);
  REQUIRE(ksivi_config_set(c.p, "model.widths", "[3, 10, 5]") == KSIVI_OK);
  CHECK(ksivi_config_validate(c.p) == KSIVI_ERR_CONFIG);
  CHECK(std::string(ksivi_last_error()).find("model.widths") != std::string::npos);

  char* names = nullptr;
  REQUIRE(ksivi_preset_names(&names) == KSIVI_OK);
  CHECK(take(names).find("cd-dim100") != std::string::npos);
}

TEST_CASE("target evaluation through the handle") {
  Config c;
  REQUIRE(ksivi_config_from_preset("toy-multimodal", &c.p) == KSIVI_OK);
  ksivi_target* t = nullptr;
  REQUIRE(ksivi_target_from_config(c.p, &t) == KSIVI_OK);
  CHECK(ksivi_target_dim(t) == 2);
  const double x[2] = {0.3, -0.4};
  const double h = 1e-6;
  double s[2], lp = 0, lp_p = 0, lp_m = 0;
  REQUIRE(ksivi_target_score(t, x, s) == KSIVI_OK);
  REQUIRE(ksivi_target_log_density(t, x, &lp) == KSIVI_OK);
  const double xp[2] = {x[0] + h, x[1]}, xm[2] = {x[0] - h, x[1]};
  ksivi_target_log_density(t, xp, &lp_p);
  ksivi_target_log_density(t, xm, &lp_m);
  CHECK(s[0] == doctest::Approx((lp_p - lp_m) / (2 * h)).epsilon(1e-6));
  const double v[2] = {1.0, 0.0};
  double hv[2];
  CHECK(ksivi_target_hvp(t, x, v, hv) == KSIVI_OK);
  CHECK(ksivi_target_score(t, nullptr, s) == KSIVI_ERR_INVALID_ARGUMENT);
  ksivi_target_free(t);
}

TEST_CASE("train, load, sample, evaluate and diagnose") {
  const fs::path dir = scratch("train");
  Config c;
  REQUIRE(ksivi_config_from_preset("toy-banana", &c.p) == KSIVI_OK);
  ksivi_config_set(c.p, "train.iterations", "30");
  ksivi_config_set(c.p, "train.eval_samples", "64");
  REQUIRE(ksivi_train(c.p, (dir / "run").c_str()) == KSIVI_OK);
  CHECK(fs::exists(dir / "run" / "manifest.json"));

  ksivi_model* m = nullptr;
  REQUIRE(ksivi_model_load((dir / "run" / "checkpoint.bin").c_str(), &m) == KSIVI_OK);
  CHECK(ksivi_model_dim(m) == 2);
  CHECK(ksivi_model_mixing_dim(m) == 3);
  std::vector<double> a(2 * 50), b(2 * 50);
  REQUIRE(ksivi_model_sample(m, 50, 9, a.data()) == KSIVI_OK);
  REQUIRE(ksivi_model_sample(m, 50, 9, b.data()) == KSIVI_OK);
  CHECK(a == b);
  for (double v : a) CHECK(std::isfinite(v));

  ksivi_target* t = nullptr;
  REQUIRE(ksivi_target_from_config(c.p, &t) == KSIVI_OK);
  double k2 = -1;
  REQUIRE(ksivi_model_ksd2(m, t, 200, 1, 1, &k2) == KSIVI_OK);
  CHECK(std::isfinite(k2));
  CHECK(ksivi_model_ksd2(m, t, 1, 1, 0, &k2) != KSIVI_OK);

  ksivi_config* cd = nullptr;
  ksivi_target* t100 = nullptr;
  REQUIRE(ksivi_config_from_preset("cd-dim50", &cd) == KSIVI_OK);
  REQUIRE(ksivi_target_from_config(cd, &t100) == KSIVI_OK);
  CHECK(ksivi_model_ksd2(m, t100, 20, 1, 0, &k2) == KSIVI_ERR_DIMENSION);
  ksivi_target_free(t100);
  ksivi_config_free(cd);

  REQUIRE(ksivi_model_save(m, (dir / "copy.bin").c_str()) == KSIVI_OK);
  ksivi_model_free(m);
  ksivi_target_free(t);

  const std::string samples = (dir / "run" / "samples.csv").string();
  char* json = nullptr;
  REQUIRE(ksivi_evaluate(samples.c_str(), samples.c_str(), "sliced_wd,corr", 0, 0, 0, &json) == KSIVI_OK);
  CHECK(take(json).find("\"sliced_wd\"") != std::string::npos);
  CHECK(ksivi_evaluate(samples.c_str(), samples.c_str(), "nope", 0, 0, 0, &json) == KSIVI_ERR_CONFIG);
  REQUIRE(ksivi_diagnose((dir / "copy.bin").c_str(), 8, 1, 0, &json) == KSIVI_OK);
  CHECK(take(json).find("jacobian_norm_mean") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("divergence surfaces as a numeric error") {
  const fs::path dir = scratch("diverge");
  Config c;
  REQUIRE(ksivi_config_from_preset("toy-banana", &c.p) == KSIVI_OK);
  ksivi_config_set(c.p, "train.iterations", "50");
  ksivi_config_set(c.p, "train.learning_rate", "1e6");
  CHECK(ksivi_train(c.p, (dir / "run").c_str()) == KSIVI_ERR_NUMERIC);
  CHECK(fs::exists(dir / "run" / "failure.json"));
  fs::remove_all(dir);
}

TEST_CASE("data generators") {
  const fs::path dir = scratch("gen");
  CHECK(ksivi_generate_waveform((dir / "w.csv").c_str(), 50, 1) == KSIVI_OK);
  CHECK(ksivi_generate_cd_observations((dir / "o.csv").c_str(), 100, 7) == KSIVI_OK);
  CHECK(ksivi_generate_waveform((dir / "w.csv").c_str(), 0, 1) != KSIVI_OK);
  fs::remove_all(dir);
}
