#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ksivi/ksivi.h"

namespace {

int report(ksivi_status s, const char* what) {
  if (s == KSIVI_OK) return 0;
  std::cerr << "ksivi " << what << ": " << ksivi_status_name(s) << ": " << ksivi_last_error() << "\n";
  return 1 + static_cast<int>(s);
}

struct ConfigArgs {
  std::string config;
  std::string preset;
  std::vector<std::string> overrides;

  void add_to(CLI::App* app) {
    app->add_option("-c,--config", config, "Config file");
    app->add_option("-p,--preset", preset, "Preset name");
    app->add_option("-s,--set", overrides, "Override key=value (repeatable)");
  }
};

// Returns a config handle or null after printing the error.
ksivi_config* open_config(const ConfigArgs& args, int& rc) {
  ksivi_config* cfg = nullptr;
  ksivi_status s;
  if (!args.config.empty()) {
    s = ksivi_config_load(args.config.c_str(), &cfg);
  } else if (!args.preset.empty()) {
    s = ksivi_config_from_preset(args.preset.c_str(), &cfg);
  } else {
    std::cerr << "ksivi: one of --config or --preset is required\n";
    rc = 2;
    return nullptr;
  }
  if ((rc = report(s, "config")) != 0) return nullptr;
  if (!args.config.empty() && !args.preset.empty()) {
    if ((rc = report(ksivi_config_set(cfg, "preset", args.preset.c_str()), "config")) != 0) {
      ksivi_config_free(cfg);
      return nullptr;
    }
  }
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "ksivi: override '" << kv << "' is not key=value\n";
      ksivi_config_free(cfg);
      rc = 2;
      return nullptr;
    }
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if ((rc = report(ksivi_config_set(cfg, key.c_str(), value.c_str()), "config")) != 0) {
      ksivi_config_free(cfg);
      return nullptr;
    }
  }
  rc = report(ksivi_config_validate(cfg), "config");
  if (rc != 0) {
    ksivi_config_free(cfg);
    return nullptr;
  }
  return cfg;
}

int emit_json(char* json, const std::string& out_path) {
  int rc = 0;
  if (out_path.empty()) {
    std::cout << json << "\n";
  } else if (FILE* f = std::fopen(out_path.c_str(), "w")) {
    std::fputs(json, f);
    std::fputc('\n', f);
    std::fclose(f);
  } else {
    std::cerr << "ksivi: cannot write " << out_path << "\n";
    rc = 1 + KSIVI_ERR_IO;
  }
  ksivi_string_free(json);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel semi-implicit variational inference"};
  app.set_version_flag("--version", std::string(ksivi_version()));
  app.require_subcommand(1);

  ConfigArgs train_args;
  std::string train_out;
  auto* train = app.add_subcommand("train", "Train a semi-implicit variational model");
  train_args.add_to(train);
  train->add_option("-o,--out", train_out, "Output directory (overrides output_dir)");
  bool dump_only = false;
  train->add_flag("--dump-config", dump_only, "Print the resolved config and exit");

  ConfigArgs gt_args;
  std::string gt_out;
  auto* gt = app.add_subcommand("sample-ground-truth", "Run SGLD/MALA to produce reference samples");
  gt_args.add_to(gt);
  gt->add_option("-o,--out", gt_out, "Output directory (overrides output_dir)");

  std::string eval_a, eval_b, eval_metrics, eval_out;
  int eval_proj = 128, eval_k = 1;
  uint64_t eval_seed = 0;
  auto* eval = app.add_subcommand("evaluate", "Compare two sample CSV files");
  eval->add_option("samples", eval_a, "Approximate samples")->required()->check(CLI::ExistingFile);
  eval->add_option("reference", eval_b, "Reference samples")->required()->check(CLI::ExistingFile);
  eval->add_option("-m,--metrics", eval_metrics, "Comma-separated: sliced_wd,mmd,kl_knn,corr");
  eval->add_option("--n-proj", eval_proj, "Sliced-WD projections")->check(CLI::PositiveNumber);
  eval->add_option("-k,--knn", eval_k, "Neighbour index for kNN-KL")->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "Projection seed");
  eval->add_option("-o,--out", eval_out, "Write JSON here instead of stdout");

  std::string diag_ckpt, diag_out;
  int diag_probes = 100;
  uint64_t diag_seed = 0;
  bool diag_zero = false;
  auto* diag = app.add_subcommand("diagnose", "Jacobian smoothness diagnostic for a checkpoint");
  diag->add_option("checkpoint", diag_ckpt, "Checkpoint file")->required();
  diag->add_option("-n,--probes", diag_probes, "Number of probe points")->check(CLI::PositiveNumber);
  diag->add_option("--seed", diag_seed, "Probe seed");
  diag->add_flag("--zero-probes", diag_zero, "Probe at z = 0 only");
  diag->add_option("-o,--out", diag_out, "Write JSON here instead of stdout");

  std::string gen_kind, gen_path;
  int gen_n = 0;
  uint64_t gen_seed = 2024;
  auto* gen = app.add_subcommand("generate-data", "Write a synthetic dataset used by the presets");
  gen->add_option("kind", gen_kind, "waveform | cd-observations")
      ->required()
      ->check(CLI::IsMember({"waveform", "cd-observations"}));
  gen->add_option("path", gen_path, "Output CSV")->required();
  gen->add_option("-n,--size", gen_n, "Rows (waveform) or time steps (cd-observations)");
  gen->add_option("--seed", gen_seed, "Generator seed");

  auto* presets = app.add_subcommand("presets", "List or print presets");
  std::string show_preset;
  presets->add_option("name", show_preset, "Preset to print");

  CLI11_PARSE(app, argc, argv);

  int rc = 0;
  if (*train) {
    ksivi_config* cfg = open_config(train_args, rc);
    if (!cfg) return rc;
    if (dump_only) {
      char* text = nullptr;
      rc = report(ksivi_config_dump(cfg, &text), "config");
      if (rc == 0) {
        std::cout << text;
        ksivi_string_free(text);
      }
    } else {
      rc = report(ksivi_train(cfg, train_out.empty() ? nullptr : train_out.c_str()), "train");
    }
    ksivi_config_free(cfg);
  } else if (*gt) {
    ksivi_config* cfg = open_config(gt_args, rc);
    if (!cfg) return rc;
    rc = report(ksivi_sample_ground_truth(cfg, gt_out.empty() ? nullptr : gt_out.c_str()), "sample-ground-truth");
    ksivi_config_free(cfg);
  } else if (*eval) {
    char* json = nullptr;
    rc = report(ksivi_evaluate(eval_a.c_str(), eval_b.c_str(), eval_metrics.c_str(), eval_proj, eval_k, eval_seed, &json),
                "evaluate");
    if (rc == 0) rc = emit_json(json, eval_out);
  } else if (*diag) {
    char* json = nullptr;
    rc = report(ksivi_diagnose(diag_ckpt.c_str(), diag_probes, diag_seed, diag_zero ? 1 : 0, &json), "diagnose");
    if (rc == 0) rc = emit_json(json, diag_out);
  } else if (*gen) {
    if (gen_kind == "waveform") {
      rc = report(ksivi_generate_waveform(gen_path.c_str(), gen_n > 0 ? gen_n : 400, gen_seed), "generate-data");
    } else {
      rc = report(ksivi_generate_cd_observations(gen_path.c_str(), gen_n > 0 ? gen_n : 100, gen_seed), "generate-data");
    }
  } else if (*presets) {
    if (show_preset.empty()) {
      char* names = nullptr;
      rc = report(ksivi_preset_names(&names), "presets");
      if (rc == 0) {
        std::cout << names;
        ksivi_string_free(names);
      }
    } else {
      ksivi_config* cfg = nullptr;
      rc = report(ksivi_config_from_preset(show_preset.c_str(), &cfg), "presets");
      if (rc == 0) {
        char* text = nullptr;
        rc = report(ksivi_config_dump(cfg, &text), "presets");
        if (rc == 0) {
          std::cout << text;
          ksivi_string_free(text);
        }
        ksivi_config_free(cfg);
      }
    }
  }
  return rc;
}
