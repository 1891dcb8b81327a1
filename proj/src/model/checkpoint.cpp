#include "f2v/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "f2v/core/errors.hpp"

using json = nlohmann::json;

namespace f2v {
namespace {

constexpr char kMagic[8] = {'F', '2', 'V', 'C', 'K', 'P', 'T', '1'};

json config_to_json(const ModelConfig& c) {
  return {{"image_size", c.image_size},         {"horizon", c.horizon},
          {"stage_channels", c.stage_channels}, {"latent_channels", c.latent_channels},
          {"latent_spatial", c.latent_spatial}, {"leaky_slope", c.leaky_slope},
          {"flow_input", flow_input_name(c.flow_input)}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.image_size = j.at("image_size").get<int>();
  c.horizon = j.at("horizon").get<int>();
  c.stage_channels = j.at("stage_channels").get<std::vector<int>>();
  c.latent_channels = j.at("latent_channels").get<int>();
  c.latent_spatial = j.at("latent_spatial").get<int>();
  c.leaky_slope = j.at("leaky_slope").get<double>();
  c.flow_input = parse_flow_input(j.at("flow_input").get<std::string>());
  return c;
}

void append_floats(std::vector<unsigned char>& out, const std::vector<float>& values) {
  for (float f : values) {
    const auto u = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(u >> (8 * i)));
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model, int epoch,
                     const OptimizerState* optimizer) {
  json blobs = json::array();
  std::vector<unsigned char> payload;
  const auto add = [&](const std::string& name, const std::string& kind, const std::vector<int>& shape,
                       const std::vector<float>& values) {
    blobs.push_back({{"name", name}, {"kind", kind}, {"shape", shape}, {"offset", payload.size()},
                     {"count", values.size()}});
    append_floats(payload, values);
  };
  const auto& params = model.parameters().all();
  for (const auto& p : params) add(p.name, "param", p.shape, p.value);
  if (optimizer) {
    if (optimizer->m.size() != params.size() || optimizer->v.size() != params.size()) {
      throw Error("optimizer state does not match the model's parameter count");
    }
    for (std::size_t i = 0; i < params.size(); ++i) add(params[i].name, "adam_m", params[i].shape, optimizer->m[i]);
    for (std::size_t i = 0; i < params.size(); ++i) add(params[i].name, "adam_v", params[i].shape, optimizer->v[i]);
  }
  json header = {{"format", "f2v-checkpoint"},
                 {"version", 1},
                 {"config", config_to_json(model.config())},
                 {"epoch", epoch},
                 {"optimizer_step", optimizer ? optimizer->step : 0},
                 {"has_optimizer", optimizer != nullptr},
                 {"blobs", blobs}};
  const std::string text = header.dump();

  std::vector<unsigned char> bytes(kMagic, kMagic + 8);
  const auto len = static_cast<std::uint64_t>(text.size());
  for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<unsigned char>(len >> (8 * i)));
  bytes.insert(bytes.end(), text.begin(), text.end());
  bytes.insert(bytes.end(), payload.begin(), payload.end());

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw FormatError(path.string() + ": not a checkpoint (bad magic at byte offset 0)");
  }
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(bytes[8 + i]) << (8 * i);
  if (16 + len > bytes.size()) throw FormatError(path.string() + ": truncated header at byte offset 16");

  json header;
  try {
    header = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(len));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": corrupt header: " + e.what());
  }
  const std::size_t data_start = 16 + len;

  Checkpoint ck{Model(config_from_json(header.at("config"))), header.at("epoch").get<int>(), std::nullopt};
  auto& params = ck.model.parameters().all();
  OptimizerState opt;
  opt.step = header.value("optimizer_step", std::int64_t{0});
  opt.m.resize(params.size());
  opt.v.resize(params.size());

  std::size_t param_i = 0;
  std::size_t m_i = 0;
  std::size_t v_i = 0;
  for (const auto& blob : header.at("blobs")) {
    const std::string kind = blob.at("kind").get<std::string>();
    const std::string name = blob.at("name").get<std::string>();
    const auto offset = blob.at("offset").get<std::size_t>();
    const auto count = blob.at("count").get<std::size_t>();
    if (data_start + offset + count * 4 > bytes.size()) {
      throw FormatError(path.string() + ": blob '" + name + "' truncated at byte offset " +
                        std::to_string(data_start + offset));
    }
    std::vector<float> values(count);
    const unsigned char* p = bytes.data() + data_start + offset;
    for (std::size_t i = 0; i < count; ++i, p += 4) {
      const std::uint32_t u = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                              (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
      values[i] = std::bit_cast<float>(u);
    }
    std::size_t* cursor = kind == "param" ? &param_i : kind == "adam_m" ? &m_i : kind == "adam_v" ? &v_i : nullptr;
    if (!cursor || *cursor >= params.size()) throw FormatError(path.string() + ": unexpected blob '" + name + "'");
    const auto& target = params[*cursor];
    if (target.name != name || target.size() != count) {
      throw FormatError(path.string() + ": blob '" + name + "' does not match model parameter '" + target.name + "'");
    }
    if (kind == "param") {
      params[*cursor].value = std::move(values);
    } else if (kind == "adam_m") {
      opt.m[*cursor] = std::move(values);
    } else {
      opt.v[*cursor] = std::move(values);
    }
    ++*cursor;
  }
  if (param_i != params.size()) throw FormatError(path.string() + ": missing parameter blobs");
  if (header.value("has_optimizer", false)) {
    if (m_i != params.size() || v_i != params.size()) throw FormatError(path.string() + ": incomplete optimizer state");
    ck.optimizer = std::move(opt);
  }
  return ck;
}

}  // namespace f2v
