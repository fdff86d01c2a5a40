#include "upscaler/dataset/training.hpp"

#include "upscaler/error.hpp"

namespace upscaler::dataset {

double effective_lora_strength(int alpha, int dim) {
  if (dim < 1 || alpha < 1) throw_error(ErrorCode::config_error, "network_dim and network_alpha must be >= 1");
  if (alpha > dim) {
    throw_error(ErrorCode::config_error,
                "network_alpha (" + std::to_string(alpha) + ") exceeds network_dim (" + std::to_string(dim) +
                    "); alpha above rank makes LoRA training unstable");
  }
  return static_cast<double>(alpha) / static_cast<double>(dim);
}

TrainingPlan training_plan(std::int64_t n_images, const AugmentConfig& aug, int batch_size, int gpu_count,
                           int grad_accum, int epochs) {
  if (n_images < 1 || aug.num_repeats < 1 || batch_size < 1 || gpu_count < 1 || grad_accum < 1 || epochs < 1) {
    throw_error(ErrorCode::invalid_argument, "training_plan: all arguments must be >= 1");
  }
  TrainingPlan plan;
  plan.samples_per_epoch = n_images * aug.num_repeats;
  const std::int64_t per_step = static_cast<std::int64_t>(batch_size) * gpu_count * grad_accum;
  plan.steps_per_epoch = (plan.samples_per_epoch + per_step - 1) / per_step;
  plan.total_steps = plan.steps_per_epoch * epochs;
  return plan;
}

std::vector<std::string> check(const TrainRunConfig& cfg) {
  std::vector<std::string> problems;
  if (!(cfg.learning_rate > 0.0)) problems.push_back("learning_rate must be positive");
  if (cfg.max_train_epochs < 1) problems.push_back("max_train_epochs must be positive");
  if (cfg.train_batch_size < 1) problems.push_back("train_batch_size must be positive");
  if (cfg.gradient_accumulation_steps < 1) problems.push_back("gradient_accumulation_steps must be positive");
  if (cfg.gpu_count < 1) problems.push_back("gpu_count must be positive");
  if (cfg.network_dim < 1) problems.push_back("network_dim must be positive");
  if (cfg.network_alpha < 1) problems.push_back("network_alpha must be positive");
  if (cfg.network_alpha > cfg.network_dim) {
    problems.push_back("network_alpha (" + std::to_string(cfg.network_alpha) + ") exceeds network_dim (" +
                       std::to_string(cfg.network_dim) + "): unintended LoRA behavior and training instability");
  }
  if (!(cfg.discrete_flow_shift > 0.0)) problems.push_back("discrete_flow_shift must be positive");
  if (!(cfg.guidance_scale > 0.0)) problems.push_back("guidance_scale must be positive");
  if (cfg.save_every_n_epochs < 1) problems.push_back("save_every_n_epochs must be positive");
  if (cfg.max_data_loader_n_workers < 1) problems.push_back("max_data_loader_n_workers must be positive");
  for (const auto& flag : cfg.passthrough_flags) {
    if (flag.empty() || flag.find_first_of(" \t=") != std::string::npos) {
      problems.push_back("passthrough flag '" + flag + "' must be a bare option name");
    }
  }
  return problems;
}

void validate(const TrainRunConfig& cfg) {
  auto problems = check(cfg);
  if (!problems.empty()) throw_error(ErrorCode::config_error, "invalid training configuration", std::move(problems));
}

nlohmann::json to_json(const TrainRunConfig& c) {
  return {
      {"learning_rate", c.learning_rate},
      {"max_train_epochs", c.max_train_epochs},
      {"train_batch_size", c.train_batch_size},
      {"gradient_accumulation_steps", c.gradient_accumulation_steps},
      {"gpu_count", c.gpu_count},
      {"network_dim", c.network_dim},
      {"network_alpha", c.network_alpha},
      {"network_module", c.network_module},
      {"optimizer", c.optimizer},
      {"timestep_sampling", c.timestep_sampling},
      {"discrete_flow_shift", c.discrete_flow_shift},
      {"model_prediction_type", c.model_prediction_type},
      {"seed", c.seed},
      {"guidance_scale", c.guidance_scale},
      {"mixed_precision", c.mixed_precision},
      {"save_precision", c.save_precision},
      {"save_model_as", c.save_model_as},
      {"save_every_n_epochs", c.save_every_n_epochs},
      {"max_data_loader_n_workers", c.max_data_loader_n_workers},
      {"log_with", c.log_with},
      {"logging_dir", c.logging_dir},
      {"passthrough_flags", c.passthrough_flags},
      {"model_paths",
       {{"pretrained_model", c.model_paths.pretrained_model},
        {"clip_l", c.model_paths.clip_l},
        {"t5xxl", c.model_paths.t5xxl},
        {"ae", c.model_paths.ae},
        {"dataset_config", c.model_paths.dataset_config},
        {"output_dir", c.model_paths.output_dir},
        {"output_name", c.model_paths.output_name}}},
  };
}

TrainRunConfig train_config_from_json(const nlohmann::json& doc) {
  TrainRunConfig c;
  if (!doc.is_object()) throw_error(ErrorCode::config_error, "training config must be a JSON object");
  try {
    auto get = [&](const char* key, auto& field) {
      if (doc.contains(key)) field = doc[key].get<std::decay_t<decltype(field)>>();
    };
    get("learning_rate", c.learning_rate);
    get("max_train_epochs", c.max_train_epochs);
    get("train_batch_size", c.train_batch_size);
    get("gradient_accumulation_steps", c.gradient_accumulation_steps);
    get("gpu_count", c.gpu_count);
    get("network_dim", c.network_dim);
    get("network_alpha", c.network_alpha);
    get("network_module", c.network_module);
    get("optimizer", c.optimizer);
    get("timestep_sampling", c.timestep_sampling);
    get("discrete_flow_shift", c.discrete_flow_shift);
    get("model_prediction_type", c.model_prediction_type);
    get("seed", c.seed);
    get("guidance_scale", c.guidance_scale);
    get("mixed_precision", c.mixed_precision);
    get("save_precision", c.save_precision);
    get("save_model_as", c.save_model_as);
    get("save_every_n_epochs", c.save_every_n_epochs);
    get("max_data_loader_n_workers", c.max_data_loader_n_workers);
    get("log_with", c.log_with);
    get("logging_dir", c.logging_dir);
    get("passthrough_flags", c.passthrough_flags);
    if (doc.contains("model_paths")) {
      const auto& m = doc["model_paths"];
      auto path = [&](const char* key, std::string& field) {
        if (m.contains(key)) field = m[key].get<std::string>();
      };
      path("pretrained_model", c.model_paths.pretrained_model);
      path("clip_l", c.model_paths.clip_l);
      path("t5xxl", c.model_paths.t5xxl);
      path("ae", c.model_paths.ae);
      path("dataset_config", c.model_paths.dataset_config);
      path("output_dir", c.model_paths.output_dir);
      path("output_name", c.model_paths.output_name);
    }
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorCode::config_error, std::string("malformed training config: ") + e.what());
  }
  return c;
}

nlohmann::json to_json(const TrainingPlan& plan) {
  return {{"samples_per_epoch", plan.samples_per_epoch},
          {"steps_per_epoch", plan.steps_per_epoch},
          {"total_steps", plan.total_steps}};
}

}  // namespace upscaler::dataset
