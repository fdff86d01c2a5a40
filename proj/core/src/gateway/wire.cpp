#include "upscaler/gateway/wire.hpp"

#include "upscaler/error.hpp"

namespace upscaler::gateway {

using nlohmann::json;

std::string_view to_string(RequestKind kind) noexcept {
  return kind == RequestKind::img2img ? "img2img" : "controlnet";
}

std::vector<std::string> check(const InferenceRequest& r) {
  std::vector<std::string> problems;
  if (r.model_id.empty()) problems.push_back("model_id: must not be empty");
  if (r.prompt.empty()) problems.push_back("prompt: must not be empty");
  if (r.image.empty()) {
    problems.push_back(r.kind == RequestKind::img2img ? "init_image: missing" : "control_image: missing");
  }
  if (r.kind == RequestKind::img2img) {
    if (!r.strength) problems.push_back("strength: required for img2img");
    if (r.conditioning_scale) problems.push_back("conditioning_scale: not allowed for img2img");
    if (r.strength && !(*r.strength >= 0.0 && *r.strength <= 1.0)) problems.push_back("strength: must be in [0,1]");
  } else {
    if (!r.conditioning_scale) problems.push_back("conditioning_scale: required for controlnet");
    if (r.strength) problems.push_back("strength: not allowed for controlnet");
    if (r.conditioning_scale && !(*r.conditioning_scale >= 0.0 && *r.conditioning_scale <= 1.0)) {
      problems.push_back("conditioning_scale: must be in [0,1]");
    }
  }
  if (r.num_inference_steps < 1) problems.push_back("num_inference_steps: must be >= 1");
  if (!(r.guidance_scale >= 0.0)) problems.push_back("guidance_scale: must be >= 0");
  if (r.num_images < 1) problems.push_back("num_images: must be >= 1");
  if (r.width < 1 || r.height < 1) problems.push_back("width/height: must be >= 1");
  if (r.lora) {
    if (r.lora->name.empty()) problems.push_back("lora.name: must not be empty");
    if (!(r.lora->scale >= 0.0 && r.lora->scale <= 1.0)) problems.push_back("lora.scale: must be in [0,1]");
  }
  return problems;
}

namespace {

json parameters(const InferenceRequest& r) {
  json doc = {
      {"kind", to_string(r.kind)},
      {"model_id", r.model_id},
      {"prompt", r.prompt},
      {"num_inference_steps", r.num_inference_steps},
      {"guidance_scale", r.guidance_scale},
      {"seed", r.seed},
      {"num_images", r.num_images},
      {"width", r.width},
      {"height", r.height},
  };
  if (r.strength) doc["strength"] = *r.strength;
  if (r.conditioning_scale) doc["conditioning_scale"] = *r.conditioning_scale;
  if (r.lora) doc["lora"] = {{"name", r.lora->name}, {"scale", r.lora->scale}};
  return doc;
}

}  // namespace

json to_json(const InferenceRequest& r) {
  json doc = parameters(r);
  doc[r.kind == RequestKind::img2img ? "init_image" : "control_image"] = base64_encode(r.image);
  return doc;
}

std::string parameter_fingerprint(const InferenceRequest& r) { return parameters(r).dump(); }

InferenceRequest request_from_json(const json& doc) {
  if (!doc.is_object()) throw_error(ErrorCode::request_error, "request body must be a JSON object");
  InferenceRequest r;
  try {
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "img2img") {
      r.kind = RequestKind::img2img;
    } else if (kind == "controlnet") {
      r.kind = RequestKind::controlnet;
    } else {
      throw_error(ErrorCode::request_error, "kind: unknown value '" + kind + "'");
    }
    r.model_id = doc.at("model_id").get<std::string>();
    r.prompt = doc.at("prompt").get<std::string>();
    const char* image_key = r.kind == RequestKind::img2img ? "init_image" : "control_image";
    if (!doc.contains(image_key)) throw_error(ErrorCode::request_error, std::string(image_key) + ": missing");
    r.image = base64_decode(doc.at(image_key).get<std::string>());
    if (doc.contains("strength") && !doc["strength"].is_null()) r.strength = doc["strength"].get<double>();
    if (doc.contains("conditioning_scale") && !doc["conditioning_scale"].is_null()) {
      r.conditioning_scale = doc["conditioning_scale"].get<double>();
    }
    r.num_inference_steps = doc.at("num_inference_steps").get<int>();
    r.guidance_scale = doc.at("guidance_scale").get<double>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.num_images = doc.at("num_images").get<int>();
    r.width = doc.at("width").get<int>();
    r.height = doc.at("height").get<int>();
    if (doc.contains("lora") && !doc["lora"].is_null()) {
      r.lora = LoraAttachment{doc["lora"].at("name").get<std::string>(), doc["lora"].at("scale").get<double>()};
    }
  } catch (const json::exception& e) {
    throw_error(ErrorCode::request_error, std::string("malformed request: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::decode_error) throw_error(ErrorCode::request_error, "image: invalid base64");
    throw;
  }
  auto problems = check(r);
  if (!problems.empty()) throw_error(ErrorCode::request_error, "invalid request: " + problems.front(), problems);
  return r;
}

json to_json(const InferenceResponse& response) {
  json images = json::array();
  for (const auto& img : response.images) images.push_back(base64_encode(img));
  return {{"images", std::move(images)}, {"seed_used", response.seed_used}};
}

InferenceResponse response_from_json(const json& doc) {
  InferenceResponse out;
  try {
    for (const auto& img : doc.at("images")) out.images.push_back(base64_decode(img.get<std::string>()));
    out.seed_used = doc.at("seed_used").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw_error(ErrorCode::protocol_error, std::string("malformed response: ") + e.what());
  } catch (const Error& e) {
    throw_error(ErrorCode::protocol_error, std::string("malformed response: ") + e.what());
  }
  return out;
}

json error_body(std::string_view code, std::string_view message) {
  return {{"code", std::string(code)}, {"message", std::string(message)}};
}

}  // namespace upscaler::gateway
