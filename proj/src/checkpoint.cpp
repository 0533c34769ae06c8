#include "pcr/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "wire.hpp"

namespace pcr::nn {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'R', 'N'};

const char* dtype_name() { return sizeof(scalar) == 4 ? "f32" : "f64"; }

void write_array(std::ostream& out, const std::vector<scalar>& a) {
  for (scalar v : a) {
    if constexpr (sizeof(scalar) == 4) {
      wire::write_f32(out, static_cast<float>(v));
    } else {
      wire::write_f64(out, static_cast<double>(v));
    }
  }
}

void read_array(std::istream& in, std::vector<scalar>& a) {
  for (auto& v : a) {
    if constexpr (sizeof(scalar) == 4) {
      v = static_cast<scalar>(wire::read_f32(in));
    } else {
      v = static_cast<scalar>(wire::read_f64(in));
    }
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const AdamState& adam, const nlohmann::json& extra) {
  nlohmann::json manifest = extra;
  manifest["format"] = "pcrn.1";
  manifest["dtype"] = dtype_name();
  manifest["adam"] = {{"step", adam.step},
                      {"lr", adam.lr},
                      {"beta1", adam.beta1},
                      {"beta2", adam.beta2},
                      {"eps", adam.eps},
                      {"decay_rate", adam.decay_rate},
                      {"decay_every", adam.decay_every}};
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& [name, p] : params.entries()) {
    layers.push_back({{"name", name}, {"in", p.w.rows}, {"out", p.w.cols}});
  }
  manifest["layers"] = layers;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const std::string text = manifest.dump();
  out.write(kMagic, 4);
  wire::write_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, p] : params.entries()) {
    write_array(out, p.w.data);
    write_array(out, p.b);
    write_array(out, p.mw.data);
    write_array(out, p.vw.data);
    write_array(out, p.mb);
    write_array(out, p.vb);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error(path + ": not a checkpoint file");
  }
  const std::uint32_t len = wire::read_u32(in);
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (!in) throw std::runtime_error(path + ": truncated manifest");

  Checkpoint ckpt;
  ckpt.manifest = nlohmann::json::parse(text);
  if (ckpt.manifest.value("dtype", "f32") != dtype_name()) {
    throw std::runtime_error(path + ": checkpoint dtype does not match this build");
  }
  const auto& adam = ckpt.manifest.at("adam");
  ckpt.adam.step = adam.at("step").get<std::int64_t>();
  ckpt.adam.lr = adam.at("lr").get<double>();
  ckpt.adam.beta1 = adam.at("beta1").get<double>();
  ckpt.adam.beta2 = adam.at("beta2").get<double>();
  ckpt.adam.eps = adam.at("eps").get<double>();
  ckpt.adam.decay_rate = adam.at("decay_rate").get<double>();
  ckpt.adam.decay_every = adam.at("decay_every").get<std::int64_t>();

  for (const auto& layer : ckpt.manifest.at("layers")) {
    Param& p = ckpt.params.add(layer.at("name").get<std::string>(),
                               layer.at("in").get<std::size_t>(),
                               layer.at("out").get<std::size_t>());
    read_array(in, p.w.data);
    read_array(in, p.b);
    read_array(in, p.mw.data);
    read_array(in, p.vw.data);
    read_array(in, p.mb);
    read_array(in, p.vb);
  }
  if (!in) throw std::runtime_error(path + ": truncated parameter blob");
  return ckpt;
}

}  // namespace pcr::nn
