// Copyright 2026 The specfilter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "specfilter/csv.hpp"
#include "specfilter/errors.hpp"
#include "specfilter/filter.hpp"
#include "specfilter/guidance.hpp"
#include "specfilter/log.hpp"
#include "specfilter/manifest.hpp"
#include "specfilter/parallel.hpp"
#include "specfilter/sandbox.hpp"
#include "specfilter/schedule.hpp"
#include "specfilter/svd.hpp"
#include "specfilter/tensor_io.hpp"

namespace specfilter::cli {

namespace fs = std::filesystem;

namespace {

// Bad flag combinations or refused overwrites; exits with kUsage.
class UsageError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "usage"; }
};

struct GlobalOptions {
  std::string log_level;
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool json_errors = false;
  std::size_t threads = 0;
};

// Defaults follow the reference setup: k=1, alpha0=0.01, gamma=40, c=0.25,
// omega=5, T=30.
struct FilterFlags {
  std::size_t top_k = 1;
  double alpha0 = 0.01;
  double gamma = 40.0;
  double c = 0.25;
  int steps = 30;
  double step = 0.0;
  std::string variant = "sigmoid";
  double lambda = 3.0;

  ScheduleConfig schedule() const {
    ScheduleConfig s;
    s.alpha0 = alpha0;
    s.gamma = gamma;
    s.c = c;
    s.total_steps = steps;
    s.variant = parse_schedule_variant(variant);
    s.lambda = lambda;
    validate(s);
    return s;
  }
};

void add_schedule_flags(CLI::App* cmd, FilterFlags& f, bool with_step) {
  cmd->add_option("--alpha0", f.alpha0, "base suppression factor")->capture_default_str();
  cmd->add_option("--gamma", f.gamma, "sigmoid steepness")->capture_default_str();
  cmd->add_option("--c", f.c, "sigmoid midpoint as a fraction of the step count")->capture_default_str();
  cmd->add_option("--steps", f.steps, "total denoising steps T")->capture_default_str();
  cmd->add_option("--lambda", f.lambda, "decay rate of the exponential variant")->capture_default_str();
  if (with_step) cmd->add_option("--step", f.step, "current step t in [0, T]")->capture_default_str();
}

class Outputs {
 public:
  explicit Outputs(bool force) : force_(force) {}

  fs::path prepare_dir(const fs::path& dir) const {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
  }

  void check(const fs::path& path) const {
    if (!force_ && fs::exists(path)) {
      throw UsageError("refusing to overwrite " + path.string() + " (pass --force)");
    }
    if (path.has_parent_path()) prepare_dir(path.parent_path());
  }

  void tensor(const fs::path& path, const Matrix& m) const {
    check(path);
    write_tensor(path, m);
  }

  void text(const fs::path& path, const std::string& content) const {
    check(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
  }

 private:
  bool force_;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void append_spectra(std::string& csv, const std::string& layer, const char* role, double t,
                    const std::vector<double>& before, const std::vector<double>& after) {
  for (std::size_t i = 0; i < before.size(); ++i) {
    csv += layer + "," + role + "," + format_double(t) + "," + std::to_string(i + 1) + "," +
           format_double(before[i]) + "," + format_double(after[i]) + "\n";
  }
}

std::vector<KeyValue> manifest_layers(const EmbeddingManifest& manifest) {
  std::vector<KeyValue> out;
  for (auto& l : load_layers(manifest)) out.push_back({std::move(l.key), std::move(l.value)});
  return out;
}

int exit_code_for(const Error& e) {
  const std::string kind = e.kind();
  if (kind == "usage") return kUsage;
  if (kind == "convergence" || kind == "divergence") return kNumeric;
  return kData;
}

int report_error(std::ostream& err, bool json_errors, const std::string& kind, const std::string& message,
                 int code) {
  if (json_errors) {
    err << nlohmann::json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
  } else {
    err << "error: " << message << "\n";
  }
  return code;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral purification of style cross-attention embeddings", "specfilter"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--log-level", global.log_level, "debug|info|warn|error|off (overrides SPECFILTER_LOG)");
  app.add_option("--seed", global.seed, "override the sampler's denoiser seed");
  app.add_flag("--force", global.force, "overwrite existing output files");
  app.add_flag("--json-errors", global.json_errors, "print errors as JSON on stderr");
  app.add_option("--threads", global.threads, "worker thread cap (0 = hardware concurrency)");

  std::function<void()> action;

  // svd
  std::string svd_in, out_u, out_sigma, out_v;
  auto* svd_cmd = app.add_subcommand("svd", "thin SVD of a tensor into U, sigma (r x 1) and V");
  svd_cmd->add_option("input", svd_in, "input tensor")->required();
  svd_cmd->add_option("--out-u", out_u)->required();
  svd_cmd->add_option("--out-sigma", out_sigma)->required();
  svd_cmd->add_option("--out-v", out_v)->required();
  svd_cmd->callback([&] {
    action = [&] {
      const Outputs o(global.force);
      const SvdFactors f = svd(read_tensor(svd_in));
      o.tensor(out_u, f.u);
      o.tensor(out_sigma, Matrix::column(f.sigma));
      o.tensor(out_v, f.v);
    };
  });

  // decompose
  std::string dec_in, out_main, out_tail;
  std::size_t dec_k = 1;
  auto* dec_cmd = app.add_subcommand("decompose", "split a tensor into main (top-k) and tail components");
  dec_cmd->add_option("input", dec_in, "input tensor")->required();
  dec_cmd->add_option("--top-k", dec_k)->capture_default_str();
  dec_cmd->add_option("--out-main", out_main)->required();
  dec_cmd->add_option("--out-tail", out_tail)->required();
  dec_cmd->callback([&] {
    action = [&] {
      const Outputs o(global.force);
      const SpectralSplit s = split(read_tensor(dec_in), {dec_k, 0.0});
      o.tensor(out_main, s.main);
      o.tensor(out_tail, s.tail);
    };
  });

  // filter
  std::string filter_manifest, filter_out_dir, key_weight, value_weight;
  bool on_feature = false;
  FilterFlags ff;
  auto* filter_cmd = app.add_subcommand("filter", "suppress the tail spectrum of every layer's K and V");
  filter_cmd->add_option("manifest", filter_manifest, "embedding manifest (JSON)")->required();
  filter_cmd->add_option("--top-k", ff.top_k)->capture_default_str();
  filter_cmd->add_option("--schedule", ff.variant, "sigmoid|fixed|linear|exponential")->capture_default_str();
  add_schedule_flags(filter_cmd, ff, true);
  filter_cmd->add_option("--out-dir", filter_out_dir)->required();
  filter_cmd->add_flag("--on-feature", on_feature,
                       "ablation: treat manifest tensors as encoder features f, filter them, then project");
  filter_cmd->add_option("--key-weight", key_weight, "W_K tensor for --on-feature");
  filter_cmd->add_option("--value-weight", value_weight, "W_V tensor for --on-feature");
  filter_cmd->callback([&] {
    action = [&] {
      if (on_feature && (key_weight.empty() || value_weight.empty())) {
        throw UsageError("--on-feature needs --key-weight and --value-weight");
      }
      if (!on_feature && (!key_weight.empty() || !value_weight.empty())) {
        throw UsageError("--key-weight/--value-weight are only meaningful with --on-feature");
      }
      const Outputs o(global.force);
      const ScheduleConfig sched = ff.schedule();
      const FilterConfig cfg{ff.top_k, alpha_at(sched, ff.step)};
      const EmbeddingManifest manifest = load_manifest(filter_manifest);
      const fs::path dir = o.prepare_dir(filter_out_dir);
      std::optional<Matrix> wk, wv;
      if (on_feature) {
        wk = read_tensor(key_weight);
        wv = read_tensor(value_weight);
      }

      std::string csv = "layer,role,t,index,sigma,sigma_filtered\n";
      EmbeddingManifest written;
      for (const auto& layer : manifest.layers) {
        const Matrix key = read_tensor(layer.key_path);
        const Matrix value = read_tensor(layer.value_path);
        const SpectralSplit ks = split(key, cfg);
        const SpectralSplit vs = split(value, cfg);
        const Matrix k_out = on_feature ? matmul(*wk, ks.filtered) : ks.filtered;
        const Matrix v_out = on_feature ? matmul(*wv, vs.filtered) : vs.filtered;
        const fs::path kp = dir / (layer.name + ".k.csem");
        const fs::path vp = dir / (layer.name + ".v.csem");
        o.tensor(kp, k_out);
        o.tensor(vp, v_out);
        written.layers.push_back({layer.name, kp, vp, k_out.cols(), k_out.rows()});
        append_spectra(csv, layer.name, "key", ff.step, ks.sigma_before, ks.sigma_after);
        append_spectra(csv, layer.name, "value", ff.step, vs.sigma_before, vs.sigma_after);
      }
      o.text(dir / "spectra.csv", csv);
      o.check(dir / "manifest.json");
      write_manifest(dir / "manifest.json", written);
    };
  });

  // schedule
  FilterFlags sf;
  std::string schedule_out;
  auto* sched_cmd = app.add_subcommand("schedule", "tabulate s(t) and alpha_t for t = 0..T");
  add_schedule_flags(sched_cmd, sf, false);
  sched_cmd->add_option("--variant", sf.variant, "sigmoid|fixed|linear|exponential")->capture_default_str();
  sched_cmd->add_option("--out", schedule_out, "CSV destination (stdout when omitted)");
  sched_cmd->callback([&] {
    action = [&] {
      const ScheduleConfig s = sf.schedule();
      std::string csv = "t,s_t,alpha_t\n";
      for (int t = 0; t <= s.total_steps; ++t) {
        csv += std::to_string(t) + "," + format_double(s_of_t(s, t)) + "," + format_double(alpha_at(s, t)) + "\n";
      }
      if (schedule_out.empty()) {
        out << csv;
      } else {
        Outputs(global.force).text(schedule_out, csv);
      }
    };
  });

  // guide
  std::string cond_path, uncond_path, guide_out;
  double omega = 5.0;
  auto* guide_cmd = app.add_subcommand("guide", "classifier-free guidance on two noise predictions");
  guide_cmd->add_option("--cond", cond_path)->required();
  guide_cmd->add_option("--uncond", uncond_path)->required();
  guide_cmd->add_option("--omega", omega)->capture_default_str();
  guide_cmd->add_option("--out", guide_out)->required();
  guide_cmd->callback([&] {
    action = [&] {
      const Matrix eps = cfg_combine(read_tensor(cond_path), read_tensor(uncond_path), omega);
      Outputs(global.force).tensor(guide_out, eps);
    };
  });

  // branches
  std::string br_manifest, br_out_dir;
  bool attenuated_negative = false;
  FilterFlags bf;
  auto* br_cmd = app.add_subcommand("branches", "build conditional / unconditional style K/V per layer");
  br_cmd->add_option("manifest", br_manifest, "embedding manifest (JSON)")->required();
  br_cmd->add_option("--top-k", bf.top_k)->capture_default_str();
  br_cmd->add_option("--variant", bf.variant, "sigmoid|fixed|linear|exponential")->capture_default_str();
  add_schedule_flags(br_cmd, bf, true);
  br_cmd->add_flag("--attenuated-negative", attenuated_negative, "use the suppressed tail as the negative");
  br_cmd->add_option("--out-dir", br_out_dir)->required();
  br_cmd->callback([&] {
    action = [&] {
      const Outputs o(global.force);
      const EmbeddingManifest manifest = load_manifest(br_manifest);
      const auto layers = manifest_layers(manifest);
      const GuidanceBranches b =
          build_branches(layers, {bf.top_k, bf.alpha0}, bf.schedule(), bf.step, {5.0, attenuated_negative});
      const fs::path dir = o.prepare_dir(br_out_dir);
      for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string& name = manifest.layers[i].name;
        o.tensor(dir / (name + ".cond.k.csem"), b.cond[i].key);
        o.tensor(dir / (name + ".cond.v.csem"), b.cond[i].value);
        o.tensor(dir / (name + ".uncond.k.csem"), b.uncond[i].key);
        o.tensor(dir / (name + ".uncond.v.csem"), b.uncond[i].value);
      }
    };
  });

  // sample
  std::string config_path, sample_out_dir;
  auto* sample_cmd = app.add_subcommand("sample", "run the synthetic guided sampler");
  sample_cmd->add_option("--config", config_path, "sandbox config (JSON)")->required();
  sample_cmd->add_option("--out-dir", sample_out_dir)->required();
  sample_cmd->callback([&] {
    action = [&] {
      const Outputs o(global.force);
      SandboxConfig cfg = sandbox_config_from_json(read_text(config_path));
      if (global.seed) cfg.denoiser_seed = *global.seed;
      const SandboxResult r = run_sampler(cfg);
      const fs::path dir = o.prepare_dir(sample_out_dir);
      o.tensor(dir / "samples.csem", r.samples);
      o.text(dir / "report.json", report_to_json(r.report));
      o.text(dir / "trace.csv", trace_to_csv(r.trace));
    };
  });

  // leakage
  std::string leak_in, basis_path, leak_out;
  auto* leak_cmd = app.add_subcommand("leakage", "energy of a tensor inside a content basis");
  leak_cmd->add_option("input", leak_in, "tensor (d x N)")->required();
  leak_cmd->add_option("--basis", basis_path, "orthonormal basis (d x c)")->required();
  leak_cmd->add_option("--out", leak_out, "JSON destination (stdout when omitted)");
  leak_cmd->callback([&] {
    action = [&] {
      const Matrix x = read_tensor(leak_in);
      const Matrix basis = read_tensor(basis_path);
      if (basis.rows() != x.rows()) {
        throw ShapeError("basis has " + std::to_string(basis.rows()) + " rows, tensor has " +
                         std::to_string(x.rows()));
      }
      const double content = basis_energy(x, basis);
      const double total = x.squared_norm();
      const nlohmann::json doc = {{"content_energy", content},
                                  {"total_energy", total},
                                  {"content_fraction", total > 0.0 ? content / total : 0.0}};
      const std::string text = doc.dump(2) + "\n";
      if (leak_out.empty()) {
        out << text;
      } else {
        Outputs(global.force).text(leak_out, text);
      }
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    // --help on a subcommand surfaces as CallForHelp from that subcommand.
    return report_error(err, global.json_errors, "usage", e.what(), kUsage);
  }

  if (!global.log_level.empty()) {
    log::Level lvl;
    if (!log::parse_level(global.log_level, lvl)) {
      return report_error(err, global.json_errors, "usage", "unknown log level " + global.log_level, kUsage);
    }
    log::set_level(lvl);
  }
  set_thread_cap(global.threads);

  try {
    action();
  } catch (const Error& e) {
    return report_error(err, global.json_errors, e.kind(), e.what(), exit_code_for(e));
  } catch (const std::exception& e) {
    return report_error(err, global.json_errors, "internal", e.what(), kData);
  }
  return kOk;
}

}  // namespace specfilter::cli
