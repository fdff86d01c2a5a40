#include "upscaler/dataset/emit.hpp"

#include <array>
#include <charconv>
#include <set>
#include <string_view>

#include "upscaler/error.hpp"

namespace upscaler::dataset {

std::string format_number(double v, bool keep_point) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), end);
  if (const auto e = s.find('e'); e != std::string::npos) {
    std::string mant = s.substr(0, e);
    std::string exp = s.substr(e + 1);
    std::string sign;
    if (!exp.empty() && (exp[0] == '-' || exp[0] == '+')) {
      if (exp[0] == '-') sign = "-";
      exp.erase(0, 1);
    }
    exp.erase(0, std::min(exp.find_first_not_of('0'), exp.size() - 1));
    return mant + "e" + sign + exp;
  }
  if (keep_point && s.find('.') == std::string::npos) s += ".0";
  return s;
}

namespace {

std::string toml_string(std::string_view s) {
  // Literal strings cannot hold a single quote; fall back to a basic string.
  if (s.find('\'') == std::string_view::npos && s.find('\n') == std::string_view::npos) {
    return "'" + std::string(s) + "'";
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

const char* boolean(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string emit_dataset_toml(const DatasetTomlConfig& cfg) {
  validate(cfg.bucket);
  if (cfg.augment.num_repeats < 1) throw_error(ErrorCode::config_error, "num_repeats must be >= 1");
  if (cfg.image_dir.empty()) throw_error(ErrorCode::config_error, "image_dir must not be empty");
  std::string out;
  out += "[[datasets]]\n";
  out += "resolution = [" + std::to_string(cfg.bucket.base_resolution.width) + ", " +
         std::to_string(cfg.bucket.base_resolution.height) + "]\n";
  out += std::string("enable_bucket = ") + boolean(cfg.bucket.enabled) + "\n";
  out += "max_bucket_reso = " + std::to_string(cfg.bucket.max_reso) + "\n";
  if (cfg.bucket.dim_step != 64) out += "bucket_reso_steps = " + std::to_string(cfg.bucket.dim_step) + "\n";
  out += "\n";
  out += "  [[datasets.subsets]]\n";
  out += "  image_dir = " + toml_string(cfg.image_dir) + "\n";
  if (!cfg.metadata_file.empty()) out += "  metadata_file = " + toml_string(cfg.metadata_file) + "\n";
  out += std::string("  flip_aug = ") + boolean(cfg.augment.flip_aug) + "\n";
  out += "  num_repeats = " + std::to_string(cfg.augment.num_repeats) + "\n";
  out += std::string("  shuffle_caption = ") + boolean(cfg.augment.shuffle_caption) + "\n";
  return out;
}

std::vector<std::string> emit_train_command(const TrainRunConfig& cfg) {
  validate(cfg);
  std::vector<std::string> args;
  std::set<std::string> used;
  auto path = [&](const char* flag, const std::string& value) { args.push_back(std::string("--") + flag + "=" + value); };
  auto opt = [&](const char* flag, std::string value) {
    args.push_back(std::string("--") + flag);
    args.push_back(std::move(value));
  };
  auto sw = [&](const char* flag) {
    if (cfg.passthrough_flags.count(flag)) {
      args.push_back(std::string("--") + flag);
      used.insert(flag);
    }
  };
  const auto& m = cfg.model_paths;
  path("pretrained_model_name_or_path", m.pretrained_model);
  path("clip_l", m.clip_l);
  path("t5xxl", m.t5xxl);
  path("ae", m.ae);
  path("dataset_config", m.dataset_config);
  path("output_dir", m.output_dir);
  path("output_name", m.output_name);
  opt("save_model_as", cfg.save_model_as);
  sw("sdpa");
  sw("highvram");
  sw("gradient_checkpointing");
  sw("persistent_data_loader_workers");
  opt("max_data_loader_n_workers", std::to_string(cfg.max_data_loader_n_workers));
  opt("mixed_precision", cfg.mixed_precision);
  opt("save_precision", cfg.save_precision);
  opt("learning_rate", format_number(cfg.learning_rate));
  opt("max_train_epochs", std::to_string(cfg.max_train_epochs));
  opt("train_batch_size", std::to_string(cfg.train_batch_size));
  opt("gradient_accumulation_steps", std::to_string(cfg.gradient_accumulation_steps));
  sw("network_train_unet_only");
  opt("network_dim", std::to_string(cfg.network_dim));
  opt("network_alpha", std::to_string(cfg.network_alpha));
  opt("network_module", cfg.network_module);
  sw("cache_latents_to_disk");
  sw("cache_text_encoder_outputs_to_disk");
  opt("optimizer_type", cfg.optimizer);
  opt("timestep_sampling", cfg.timestep_sampling);
  opt("discrete_flow_shift", format_number(cfg.discrete_flow_shift));
  opt("save_every_n_epochs", std::to_string(cfg.save_every_n_epochs));
  opt("model_prediction_type", cfg.model_prediction_type);
  opt("seed", std::to_string(cfg.seed));
  opt("guidance_scale", format_number(cfg.guidance_scale, true));
  opt("log_with", cfg.log_with);
  opt("logging_dir", cfg.logging_dir);
  for (const auto& flag : cfg.passthrough_flags) {
    if (!used.count(flag)) args.push_back("--" + flag);
  }
  return args;
}

std::string render_command(const std::vector<std::string>& args) {
  std::string out = "accelerate launch flux_train_network.py";
  for (std::size_t i = 0; i < args.size(); ++i) {
    out += " \\\n    " + args[i];
    const bool takes_value = i + 1 < args.size() && args[i + 1].rfind("--", 0) != 0;
    if (takes_value) {
      const auto& v = args[++i];
      out += " ";
      if (v.find_first_of("/ ") != std::string::npos) {
        out += "\"" + v + "\"";
      } else {
        out += v;
      }
    }
  }
  return out + "\n";
}

}  // namespace upscaler::dataset
