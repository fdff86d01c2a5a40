#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "upscaler/dataset/manifest.hpp"

namespace upscaler::dataset {

/// alpha / dim. Throws config-error when alpha > dim (unstable LoRA training)
/// or either value is < 1.
double effective_lora_strength(int alpha, int dim);

struct TrainingPlan {
  std::int64_t samples_per_epoch = 0;
  std::int64_t steps_per_epoch = 0;
  std::int64_t total_steps = 0;
};

/// samples = images * repeats; steps/epoch = ceil(samples / (batch * gpus * accum)).
TrainingPlan training_plan(std::int64_t n_images, const AugmentConfig& aug, int batch_size, int gpu_count,
                           int grad_accum, int epochs);

struct ModelPaths {
  std::string pretrained_model = "/workspace/models/flux1-dev.safetensors";
  std::string clip_l = "/workspace/models/clip_l.safetensors";
  std::string t5xxl = "/workspace/models/t5xxl_fp16.safetensors";
  std::string ae = "/workspace/models/ae.safetensors";
  std::string dataset_config = "/workspace/dataset.toml";
  std::string output_dir = "/workspace/output";
  std::string output_name = "football_lora";
};

// Flux LoRA training run, defaults as used for the football dataset.
struct TrainRunConfig {
  double learning_rate = 1e-4;
  int max_train_epochs = 10;
  int train_batch_size = 4;
  int gradient_accumulation_steps = 1;
  int gpu_count = 2;
  int network_dim = 8;
  int network_alpha = 8;
  std::string network_module = "networks.lora_flux";
  std::string optimizer = "adamw8bit";
  std::string timestep_sampling = "shift";
  double discrete_flow_shift = 3.1582;
  std::string model_prediction_type = "raw";
  std::uint64_t seed = 42;
  double guidance_scale = 1.0;
  std::string mixed_precision = "bf16";
  std::string save_precision = "bf16";
  std::string save_model_as = "safetensors";
  int save_every_n_epochs = 2;
  int max_data_loader_n_workers = 2;
  std::string log_with = "tensorboard";
  std::string logging_dir = "/workspace/";
  // Opaque switches forwarded verbatim as --<flag>.
  std::set<std::string> passthrough_flags = {
      "sdpa",
      "highvram",
      "gradient_checkpointing",
      "persistent_data_loader_workers",
      "network_train_unet_only",
      "cache_latents_to_disk",
      "cache_text_encoder_outputs_to_disk",
  };
  ModelPaths model_paths;
};

/// Every invariant violation as a message; empty when valid.
std::vector<std::string> check(const TrainRunConfig& cfg);
/// Throws config-error carrying check()'s findings.
void validate(const TrainRunConfig& cfg);

nlohmann::json to_json(const TrainRunConfig& cfg);
/// Missing keys keep their defaults. Throws config-error on type mismatches.
TrainRunConfig train_config_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const TrainingPlan& plan);

}  // namespace upscaler::dataset
