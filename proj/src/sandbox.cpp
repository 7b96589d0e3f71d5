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

#include "specfilter/sandbox.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "specfilter/attention.hpp"
#include "specfilter/csv.hpp"
#include "specfilter/errors.hpp"
#include "specfilter/parallel.hpp"
#include "specfilter/random.hpp"

namespace specfilter {

namespace {

using nlohmann::json;

Matrix planted(const Matrix& left, const Matrix& right, std::span<const double> sigmas, std::size_t offset) {
  MatrixBuilder out(left.rows(), right.rows());
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    const std::size_t col = offset + k;
    for (std::size_t i = 0; i < left.rows(); ++i) {
      const double us = sigmas[k] * left(i, col);
      for (std::size_t j = 0; j < right.rows(); ++j) out(i, j) += us * right(j, col);
    }
  }
  return std::move(out).finish();
}

Matrix columns(const Matrix& m, std::size_t first, std::size_t count) {
  MatrixBuilder out(m.rows(), count);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = m(i, first + j);
  return std::move(out).finish();
}

// Fixed random parameters of the toy denoiser for one attention layer.
struct DenoiserLayer {
  Matrix query_proj;  // 2 x d
  Matrix out_proj;    // d x 2
  Matrix text_keys;   // text_tokens x d
  Matrix text_values; // text_tokens x d
};

struct Denoiser {
  Matrix anchor;  // 1 x 2 prompt anchor point
  std::vector<DenoiserLayer> layers;
  Injection injection;
  double style_weight;

  // Attention read-out of one layer for style K/V given feature-major.
  Matrix layer_readout(std::size_t l, const Matrix& q, const KeyValue& style) const {
    const DenoiserLayer& p = layers[l];
    const Matrix ks = style.key.transpose();
    const Matrix vs = style.value.transpose();
    Matrix attn = injection == Injection::kAdapter
                      ? adapter_attention(q, p.text_keys, p.text_values, ks, vs, 1.0, style_weight)
                      : joint_attention({q, p.text_keys, p.text_values, ks, vs});
    return matmul(attn, p.out_proj);
  }

  // eps(x) = (x - anchor) + sum_l attention_l(x) W_o^l.
  Matrix predict(const Matrix& x, std::span<const KeyValue> style) const {
    MatrixBuilder eps(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) eps(i, j) = x(i, j) - anchor(0, j);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const Matrix q = matmul(x, layers[l].query_proj);
      const Matrix r = layer_readout(l, q, style[l]);
      for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) eps(i, j) += r(i, j);
    }
    return std::move(eps).finish();
  }
};

Denoiser make_denoiser(const SandboxConfig& cfg, Rng& rng) {
  const std::size_t d = cfg.spec.dim;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  Denoiser out{rng.gaussian_matrix(1, 2), {}, cfg.injection, cfg.style_weight};
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    DenoiserLayer p{rng.gaussian_matrix(2, d), rng.gaussian_matrix(d, 2, inv_sqrt_d),
                    rng.gaussian_matrix(cfg.text_tokens, d, inv_sqrt_d),
                    rng.gaussian_matrix(cfg.text_tokens, d, inv_sqrt_d)};
    out.layers.push_back(std::move(p));
  }
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

bool filters_conditional(SandboxMode m) { return m == SandboxMode::kCsSvdOnly || m == SandboxMode::kFull; }
bool tail_negative(SandboxMode m) { return m == SandboxMode::kSsCfgOnly || m == SandboxMode::kFull; }

// --- JSON helpers -----------------------------------------------------------

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  std::string unknown;
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) throw ConfigError(where + ": unknown field(s): " + unknown);
}

template <typename T>
void read_field(const json& obj, const char* key, T& dst, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    dst = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

}  // namespace

void validate(const SyntheticStyleSpec& spec) {
  if (spec.style_sigmas.empty()) throw ConfigError("spec.style_sigmas must hold at least one value");
  for (const auto* list : {&spec.style_sigmas, &spec.content_sigmas}) {
    for (double s : *list) {
      if (!std::isfinite(s) || s < 0.0) throw ConfigError("spec sigmas must be finite and non-negative");
    }
  }
  const double content_max =
      spec.content_sigmas.empty() ? 0.0 : *std::max_element(spec.content_sigmas.begin(), spec.content_sigmas.end());
  for (double s : spec.style_sigmas) {
    if (!(s > content_max)) throw ConfigError("every style sigma must exceed the largest content sigma");
  }
  const std::size_t r = spec.style_sigmas.size() + spec.content_sigmas.size();
  if (spec.dim < r || spec.tokens < r) {
    throw ConfigError("spec needs dim and tokens >= " + std::to_string(r) + " (style + content directions)");
  }
}

StyleEmbedding make_style_embedding(const SyntheticStyleSpec& spec) {
  validate(spec);
  const std::size_t s = spec.style_sigmas.size();
  const std::size_t c = spec.content_sigmas.size();
  const std::size_t r = s + c;
  std::vector<double> all(spec.style_sigmas);
  all.insert(all.end(), spec.content_sigmas.begin(), spec.content_sigmas.end());

  Rng rng(spec.seed);
  const Matrix uk = random_orthonormal(rng, spec.dim, r);
  const Matrix vk = random_orthonormal(rng, spec.tokens, r);
  const Matrix uv = random_orthonormal(rng, spec.dim, r);
  const Matrix vv = random_orthonormal(rng, spec.tokens, r);

  StyleEmbedding out;
  out.key = planted(uk, vk, all, 0);
  out.value = planted(uv, vv, all, 0);
  out.content_basis = columns(uk, s, c);
  out.value_content_basis = columns(uv, s, c);
  out.key_content = planted(uk, vk, spec.content_sigmas, s);
  out.value_content = planted(uv, vv, spec.content_sigmas, s);
  return out;
}

double basis_energy(const Matrix& x, const Matrix& basis) {
  if (basis.cols() == 0) return 0.0;
  return matmul(basis.transpose(), x).squared_norm();
}

std::string_view to_string(SandboxMode m) {
  switch (m) {
    case SandboxMode::kBaseline: return "baseline";
    case SandboxMode::kCsSvdOnly: return "cs_svd_only";
    case SandboxMode::kSsCfgOnly: return "ss_cfg_only";
    case SandboxMode::kFull: return "full";
  }
  return "unknown";
}

SandboxMode parse_sandbox_mode(std::string_view name) {
  for (auto m : {SandboxMode::kBaseline, SandboxMode::kCsSvdOnly, SandboxMode::kSsCfgOnly, SandboxMode::kFull}) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("unknown sandbox mode '" + std::string(name) +
                    "' (expected baseline, cs_svd_only, ss_cfg_only or full)");
}

std::string_view to_string(Injection i) { return i == Injection::kAdapter ? "adapter" : "joint"; }

Injection parse_injection(std::string_view name) {
  if (name == "adapter") return Injection::kAdapter;
  if (name == "joint") return Injection::kJoint;
  throw ConfigError("unknown injection '" + std::string(name) + "' (expected adapter or joint)");
}

void validate(const SandboxConfig& cfg) {
  if (cfg.steps < 1) throw ConfigError("steps must be >= 1");
  if (cfg.schedule.total_steps != cfg.steps) {
    throw ConfigError("schedule.total_steps (" + std::to_string(cfg.schedule.total_steps) + ") must equal steps (" +
                      std::to_string(cfg.steps) + ")");
  }
  validate(cfg.schedule);
  validate(cfg.spec);
  if (!std::isfinite(cfg.omega)) throw ConfigError("omega must be finite");
  if (!std::isfinite(cfg.style_weight)) throw ConfigError("style_weight must be finite");
  if (cfg.layers < 1) throw ConfigError("layers must be >= 1");
  if (cfg.points < 1) throw ConfigError("points must be >= 1");
  if (cfg.text_tokens < 1) throw ConfigError("text_tokens must be >= 1");
}

SandboxResult run_sampler(const SandboxConfig& cfg, const BranchHook& hook) {
  validate(cfg);

  std::vector<StyleEmbedding> embeddings(cfg.layers);
  parallel_for(cfg.layers, [&](std::size_t l) {
    SyntheticStyleSpec spec = cfg.spec;
    spec.seed = cfg.spec.seed + l;
    embeddings[l] = make_style_embedding(spec);
  });
  std::vector<KeyValue> original;
  original.reserve(cfg.layers);
  for (const auto& e : embeddings) original.push_back({e.key, e.value});
  const auto factors = decompose_layers(original);

  Rng rng(cfg.denoiser_seed);
  const Denoiser denoiser = make_denoiser(cfg, rng);
  Matrix x = rng.gaussian_matrix(cfg.points, 2);

  auto content_energy = [&](std::span<const KeyValue> kv) {
    double e = 0.0;
    for (std::size_t l = 0; l < kv.size(); ++l) {
      e += basis_energy(kv[l].key, embeddings[l].content_basis);
      e += basis_energy(kv[l].value, embeddings[l].value_content_basis);
    }
    return e;
  };

  SandboxResult result;
  result.report.content_energy_before = content_energy(original);
  const BranchOptions options{cfg.omega, cfg.attenuated_negative};
  const double h = 1.0 / static_cast<double>(cfg.steps);

  for (int t = 0; t < cfg.steps; ++t) {
    GuidanceBranches branches = build_branches(factors, cfg.filter, cfg.schedule, t, options);
    if (!filters_conditional(cfg.mode)) {
      branches.cond = original;
      for (auto& s : branches.spectra) {
        s.key_after = s.key_before;
        s.value_after = s.value_before;
      }
    }
    if (!tail_negative(cfg.mode)) {
      for (auto& kv : branches.uncond) {
        kv.key = Matrix::zeros(kv.key.rows(), kv.key.cols());
        kv.value = Matrix::zeros(kv.value.rows(), kv.value.cols());
      }
    }
    if (hook) hook(t, branches);
    result.report.per_step_alpha.push_back(branches.alpha_t);

    for (std::size_t l = 0; l < branches.spectra.size(); ++l) {
      const LayerSpectra& s = branches.spectra[l];
      for (std::size_t i = 0; i < s.key_before.size(); ++i)
        result.trace.push_back({t, l, "key", i + 1, s.key_before[i], s.key_after[i], branches.alpha_t});
      for (std::size_t i = 0; i < s.value_before.size(); ++i)
        result.trace.push_back({t, l, "value", i + 1, s.value_before[i], s.value_after[i], branches.alpha_t});
    }

    try {
      const Matrix eps_cond = denoiser.predict(x, branches.cond);
      const Matrix eps_uncond = denoiser.predict(x, branches.uncond);
      const Matrix eps = cfg_combine(eps_cond, eps_uncond, cfg.omega);
      x = x - h * eps;
    } catch (const DomainError& e) {
      throw DivergenceError(std::string("latent became non-finite: ") + e.what(), t);
    }
    if (t + 1 == cfg.steps) result.report.content_energy_after = content_energy(branches.cond);
  }

  // Correlation between the final points and the read-out produced by the
  // planted content components alone.
  std::vector<KeyValue> content;
  for (const auto& e : embeddings) content.push_back({e.key_content, e.value_content});
  MatrixBuilder field(x.rows(), x.cols());
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const Matrix r = denoiser.layer_readout(l, matmul(x, denoiser.layers[l].query_proj), content[l]);
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) field(i, j) += r(i, j);
  }
  const Matrix content_field = std::move(field).finish();
  result.report.sample_content_correlation = pearson(x.data(), content_field.data());
  result.samples = std::move(x);
  return result;
}

SandboxConfig sandbox_config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("sandbox config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc,
                 {"steps", "filter", "schedule", "omega", "mode", "denoiser_seed", "spec", "layers", "points",
                  "text_tokens", "injection", "style_weight", "attenuated_negative"},
                 "config");
  SandboxConfig cfg;
  read_field(doc, "steps", cfg.steps, "config");
  cfg.schedule.total_steps = cfg.steps;
  read_field(doc, "omega", cfg.omega, "config");
  read_field(doc, "denoiser_seed", cfg.denoiser_seed, "config");
  read_field(doc, "layers", cfg.layers, "config");
  read_field(doc, "points", cfg.points, "config");
  read_field(doc, "text_tokens", cfg.text_tokens, "config");
  read_field(doc, "style_weight", cfg.style_weight, "config");
  read_field(doc, "attenuated_negative", cfg.attenuated_negative, "config");
  std::string name;
  if (doc.contains("mode")) {
    read_field(doc, "mode", name, "config");
    cfg.mode = parse_sandbox_mode(name);
  }
  if (doc.contains("injection")) {
    read_field(doc, "injection", name, "config");
    cfg.injection = parse_injection(name);
  }
  if (const auto it = doc.find("filter"); it != doc.end()) {
    reject_unknown(*it, {"top_k", "alpha"}, "config.filter");
    read_field(*it, "top_k", cfg.filter.top_k, "config.filter");
    read_field(*it, "alpha", cfg.filter.alpha, "config.filter");
  }
  if (const auto it = doc.find("schedule"); it != doc.end()) {
    reject_unknown(*it, {"alpha0", "gamma", "c", "total_steps", "variant", "lambda"}, "config.schedule");
    read_field(*it, "alpha0", cfg.schedule.alpha0, "config.schedule");
    read_field(*it, "gamma", cfg.schedule.gamma, "config.schedule");
    read_field(*it, "c", cfg.schedule.c, "config.schedule");
    read_field(*it, "total_steps", cfg.schedule.total_steps, "config.schedule");
    read_field(*it, "lambda", cfg.schedule.lambda, "config.schedule");
    if (it->contains("variant")) {
      read_field(*it, "variant", name, "config.schedule");
      cfg.schedule.variant = parse_schedule_variant(name);
    }
  }
  if (const auto it = doc.find("spec"); it != doc.end()) {
    reject_unknown(*it, {"dim", "tokens", "style_sigmas", "content_sigmas", "seed"}, "config.spec");
    read_field(*it, "dim", cfg.spec.dim, "config.spec");
    read_field(*it, "tokens", cfg.spec.tokens, "config.spec");
    read_field(*it, "style_sigmas", cfg.spec.style_sigmas, "config.spec");
    read_field(*it, "content_sigmas", cfg.spec.content_sigmas, "config.spec");
    read_field(*it, "seed", cfg.spec.seed, "config.spec");
  }
  validate(cfg);
  return cfg;
}

std::string sandbox_config_to_json(const SandboxConfig& cfg) {
  json doc = {
      {"steps", cfg.steps},
      {"filter", {{"top_k", cfg.filter.top_k}, {"alpha", cfg.filter.alpha}}},
      {"schedule",
       {{"alpha0", cfg.schedule.alpha0},
        {"gamma", cfg.schedule.gamma},
        {"c", cfg.schedule.c},
        {"total_steps", cfg.schedule.total_steps},
        {"variant", std::string(to_string(cfg.schedule.variant))},
        {"lambda", cfg.schedule.lambda}}},
      {"omega", cfg.omega},
      {"mode", std::string(to_string(cfg.mode))},
      {"denoiser_seed", cfg.denoiser_seed},
      {"spec",
       {{"dim", cfg.spec.dim},
        {"tokens", cfg.spec.tokens},
        {"style_sigmas", cfg.spec.style_sigmas},
        {"content_sigmas", cfg.spec.content_sigmas},
        {"seed", cfg.spec.seed}}},
      {"layers", cfg.layers},
      {"points", cfg.points},
      {"text_tokens", cfg.text_tokens},
      {"injection", std::string(to_string(cfg.injection))},
      {"style_weight", cfg.style_weight},
      {"attenuated_negative", cfg.attenuated_negative},
  };
  return doc.dump(2) + "\n";
}

std::string report_to_json(const LeakageReport& report) {
  json doc = {{"content_energy_before", report.content_energy_before},
              {"content_energy_after", report.content_energy_after},
              {"per_step_alpha", report.per_step_alpha},
              {"sample_content_correlation", report.sample_content_correlation}};
  return doc.dump(2) + "\n";
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::string out = "t,layer,role,index,sigma,sigma_filtered,alpha_t\n";
  for (const auto& r : trace) {
    out += std::to_string(r.t) + "," + std::to_string(r.layer) + "," + r.role + "," + std::to_string(r.index) + "," +
           format_double(r.sigma) + "," + format_double(r.sigma_filtered) + "," + format_double(r.alpha_t) + "\n";
  }
  return out;
}

}  // namespace specfilter
