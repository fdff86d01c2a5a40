#include "upscaler/degrade/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "upscaler/error.hpp"
#include "upscaler/rng.hpp"

namespace upscaler::degrade {

namespace {

struct KindInfo {
  StepKind kind;
  std::string_view name;
  std::string_view param_key;
  double min;
  double max;
  bool min_inclusive;
  bool integral;
};

constexpr KindInfo kKinds[] = {
    {StepKind::gaussian_noise, "gaussian_noise", "sigma", 0.0, 0.3, true, false},
    {StepKind::poisson_noise, "poisson_noise", "scale", 0.0, 1024.0, false, false},
    {StepKind::gaussian_blur, "gaussian_blur", "sigma", 0.0, 5.0, false, false},
    {StepKind::jpeg_artifacts, "jpeg_artifacts", "quality", 10.0, 100.0, true, true},
    {StepKind::downsample, "downsample", "factor", 2.0, 16.0, true, true},
};

const KindInfo& info(StepKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k;
  return kKinds[0];
}

bool in_range(const KindInfo& k, double v) {
  const bool above = k.min_inclusive ? v >= k.min : v > k.min;
  return above && v <= k.max && (!k.integral || v == std::floor(v));
}

std::string_view kernel_name(imaging::Kernel k) {
  switch (k) {
    case imaging::Kernel::lanczos: return "lanczos";
    case imaging::Kernel::nearest: return "nearest";
    case imaging::Kernel::bilinear: return "bilinear";
  }
  return "lanczos";
}

imaging::Kernel kernel_from_name(const std::string& name) {
  if (name == "lanczos") return imaging::Kernel::lanczos;
  if (name == "nearest") return imaging::Kernel::nearest;
  if (name == "bilinear") return imaging::Kernel::bilinear;
  throw_error(ErrorCode::invalid_argument, "unknown resample kernel '" + name + "'");
}

double realize(const KindInfo& k, const ParamRange& range, Rng& rng) {
  if (range.lo == range.hi) return range.lo;
  if (k.integral) {
    return static_cast<double>(rng.uniform_int(static_cast<std::int64_t>(range.lo), static_cast<std::int64_t>(range.hi)));
  }
  return rng.uniform(range.lo, range.hi);
}

}  // namespace

std::string_view to_string(StepKind kind) noexcept { return info(kind).name; }

std::optional<StepKind> step_kind_from_string(std::string_view name) noexcept {
  for (const auto& k : kKinds)
    if (k.name == name) return k.kind;
  return std::nullopt;
}

void validate_spec(const DegradationSpec& spec) {
  std::vector<std::string> problems;
  if (spec.orders != 1 && spec.orders != 2) problems.push_back("orders must be 1 or 2");
  for (std::size_t i = 0; i < spec.steps.size(); ++i) {
    const auto& step = spec.steps[i];
    const auto& k = info(step.kind);
    const std::string where = "steps[" + std::to_string(i) + "]." + std::string(k.param_key);
    if (step.param.lo > step.param.hi) problems.push_back(where + ": lo > hi");
    if (!in_range(k, step.param.lo) || !in_range(k, step.param.hi)) {
      problems.push_back(where + " outside " + (k.min_inclusive ? "[" : "(") + std::to_string(k.min) + ", " +
                         std::to_string(k.max) + "]");
    }
  }
  if (!problems.empty()) throw_error(ErrorCode::invalid_argument, "degradation spec out of range", problems);
}

Fixture synthesize_fixture(const ImageBuffer& ground_truth, const DegradationSpec& spec) {
  validate_spec(spec);
  if (ground_truth.width() < 256 || ground_truth.height() < 256) {
    throw_error(ErrorCode::invalid_argument, "ground truth must be at least 256x256");
  }
  Fixture fx{ground_truth, {}};
  fx.manifest.seed = spec.seed;
  fx.manifest.orders = spec.orders;
  fx.manifest.input_width = ground_truth.width();
  fx.manifest.input_height = ground_truth.height();
  if (!spec.steps.empty()) {
    for (int order = 1; order <= spec.orders; ++order) {
      const std::uint64_t order_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(order));
      for (std::size_t i = 0; i < spec.steps.size(); ++i) {
        const auto& step = spec.steps[i];
        Rng rng(derive_seed(order_seed, i));
        RealizedStep r;
        r.order = order;
        r.index = static_cast<int>(i);
        r.kind = step.kind;
        r.param = realize(info(step.kind), step.param, rng);
        r.noise_seed = rng();
        switch (step.kind) {
          case StepKind::gaussian_noise: fx.degraded = gaussian_noise(fx.degraded, r.param, r.noise_seed); break;
          case StepKind::poisson_noise: fx.degraded = poisson_noise(fx.degraded, r.param, r.noise_seed); break;
          case StepKind::gaussian_blur: fx.degraded = gaussian_blur(fx.degraded, r.param); break;
          case StepKind::jpeg_artifacts:
            fx.degraded = jpeg_artifacts(fx.degraded, static_cast<int>(r.param));
            break;
          case StepKind::downsample:
            fx.degraded = downsample(fx.degraded, static_cast<int>(r.param), step.method);
            break;
        }
        fx.manifest.realized.push_back(r);
      }
    }
  }
  fx.manifest.output_width = fx.degraded.width();
  fx.manifest.output_height = fx.degraded.height();
  return fx;
}

DegradationSpec second_order_spec(std::uint64_t seed) {
  DegradationSpec spec;
  spec.orders = 2;
  spec.seed = seed;
  spec.steps = {
      {StepKind::gaussian_blur, {0.4, 2.0}},
      {StepKind::gaussian_noise, {0.0, 0.04}},
      {StepKind::poisson_noise, {128.0, 1024.0}},
      {StepKind::jpeg_artifacts, {30.0, 90.0}},
      {StepKind::downsample, ParamRange::fixed(4.0)},
  };
  return spec;
}

ImageBuffer synthetic_ground_truth(int side, std::uint64_t seed) {
  if (side < 16) throw_error(ErrorCode::invalid_argument, "synthetic ground truth needs side >= 16");
  Rng rng(seed);
  ImageBuffer img(side, side);
  const double stripe = side / 8.0;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const bool light = static_cast<int>(x / stripe) % 2 == 0;
      const double shade = 0.05 * static_cast<double>(y) / side;
      img.at(x, y, 0) = static_cast<float>(0.16 + shade);
      img.at(x, y, 1) = static_cast<float>((light ? 0.52 : 0.45) + shade);
      img.at(x, y, 2) = static_cast<float>(0.18 + shade);
    }
  }
  auto fill_rect = [&](int x0, int y0, int x1, int y1, float r, float g, float b) {
    for (int y = std::max(0, y0); y < std::min(side, y1); ++y) {
      for (int x = std::max(0, x0); x < std::min(side, x1); ++x) {
        img.at(x, y, 0) = r;
        img.at(x, y, 1) = g;
        img.at(x, y, 2) = b;
      }
    }
  };
  const int line = std::max(1, side / 128);
  fill_rect(0, side / 2 - line, side, side / 2 + line, 0.95f, 0.95f, 0.95f);
  fill_rect(side / 8, side / 8, side / 8 + line * 2, side * 7 / 8, 0.95f, 0.95f, 0.95f);
  const int figures = 3 + static_cast<int>(rng.uniform_int(0, 2));
  for (int f = 0; f < figures; ++f) {
    const int w = side / 10 + static_cast<int>(rng.uniform_int(0, side / 20));
    const int h = w * 2;
    const int x0 = static_cast<int>(rng.uniform_int(0, side - w - 1));
    const int y0 = static_cast<int>(rng.uniform_int(0, side - h - 1));
    const auto r = static_cast<float>(rng.uniform(0.1, 0.95));
    const auto g = static_cast<float>(rng.uniform(0.05, 0.4));
    const auto b = static_cast<float>(rng.uniform(0.1, 0.95));
    fill_rect(x0, y0, x0 + w, y0 + h * 3 / 5, r, g, b);                          // jersey
    fill_rect(x0, y0 + h * 3 / 5, x0 + w, y0 + h, 0.9f, 0.9f, 0.9f);              // shorts
    fill_rect(x0 + w / 3, y0 + h / 8, x0 + w * 2 / 3, y0 + h / 3, 1.0f, 1.0f, 0.85f);  // number patch
  }
  return img;
}

nlohmann::json to_json(const FixtureManifest& m) {
  nlohmann::json realized = nlohmann::json::array();
  for (const auto& r : m.realized) {
    nlohmann::json entry = {{"order", r.order}, {"index", r.index}, {"kind", to_string(r.kind)}};
    const auto& k = info(r.kind);
    if (k.integral) {
      entry[std::string(k.param_key)] = static_cast<std::int64_t>(r.param);
    } else {
      entry[std::string(k.param_key)] = r.param;
    }
    if (r.kind == StepKind::gaussian_noise || r.kind == StepKind::poisson_noise) entry["noise_seed"] = r.noise_seed;
    realized.push_back(std::move(entry));
  }
  return {
      {"seed", m.seed},
      {"orders", m.orders},
      {"input", {{"width", m.input_width}, {"height", m.input_height}}},
      {"output", {{"width", m.output_width}, {"height", m.output_height}}},
      {"realized", std::move(realized)},
  };
}

nlohmann::json to_json(const DegradationSpec& spec) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : spec.steps) {
    const auto& k = info(s.kind);
    nlohmann::json entry = {{"kind", k.name}};
    if (s.param.lo == s.param.hi) {
      entry[std::string(k.param_key)] = s.param.lo;
    } else {
      entry[std::string(k.param_key)] = {s.param.lo, s.param.hi};
    }
    if (s.kind == StepKind::downsample) entry["method"] = kernel_name(s.method);
    steps.push_back(std::move(entry));
  }
  return {{"orders", spec.orders}, {"seed", spec.seed}, {"steps", std::move(steps)}};
}

DegradationSpec spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw_error(ErrorCode::invalid_argument, "degradation spec must be a JSON object");
  DegradationSpec spec;
  try {
    spec.orders = doc.value("orders", 1);
    spec.seed = doc.value("seed", std::uint64_t{0});
    for (const auto& entry : doc.value("steps", nlohmann::json::array())) {
      const auto name = entry.at("kind").get<std::string>();
      const auto kind = step_kind_from_string(name);
      if (!kind) throw_error(ErrorCode::invalid_argument, "unknown degradation step '" + name + "'");
      const auto& k = info(*kind);
      DegradationStep step;
      step.kind = *kind;
      const auto& p = entry.at(std::string(k.param_key));
      if (p.is_array()) {
        if (p.size() != 2) throw_error(ErrorCode::invalid_argument, name + ": range must be [lo, hi]");
        step.param = {p[0].get<double>(), p[1].get<double>()};
      } else {
        step.param = ParamRange::fixed(p.get<double>());
      }
      if (entry.contains("method")) step.method = kernel_from_name(entry["method"].get<std::string>());
      spec.steps.push_back(step);
    }
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorCode::invalid_argument, std::string("malformed degradation spec: ") + e.what());
  }
  return spec;
}

}  // namespace upscaler::degrade
