#include <bit>
#include <cstring>
#include <fstream>
#include "json.hpp"
#include <stdexcept>

#include "wdmturbo/waveform.hpp"

namespace wdmturbo {
namespace {

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xffU) << 24) | ((v & 0xff00U) << 8) | ((v >> 8) & 0xff00U) | (v >> 24);
}

void put(std::ofstream& out, double v) {
  const std::uint32_t bits = to_le(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

double get(std::ifstream& in) {
  std::uint32_t bits = 0;
  in.read(reinterpret_cast<char*>(&bits), sizeof bits);
  if (!in) throw std::runtime_error("waveform dump truncated");
  return static_cast<double>(std::bit_cast<float>(to_le(bits)));
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
  auto s = path;
  s += ".json";
  return s;
}

}  // namespace

void write_waveform(const DualPolSignal& signal, const std::filesystem::path& path) {
  signal.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    put(out, signal.x[i].real());
    put(out, signal.x[i].imag());
    put(out, signal.y[i].real());
    put(out, signal.y[i].imag());
  }
  nlohmann::ordered_json meta;
  meta["sample_rate"] = signal.sample_rate;
  meta["length"] = signal.size();
  meta["center_freq_offset"] = signal.center_freq_offset;
  std::ofstream js(sidecar(path));
  if (!js) throw std::runtime_error("cannot write " + sidecar(path).string());
  js << meta.dump() << '\n';
}

DualPolSignal read_waveform(const std::filesystem::path& path) {
  std::ifstream js(sidecar(path));
  if (!js) throw std::runtime_error("missing waveform sidecar " + sidecar(path).string());
  const auto meta = nlohmann::json::parse(js);
  DualPolSignal sig;
  sig.sample_rate = meta.at("sample_rate").get<double>();
  sig.center_freq_offset = meta.value("center_freq_offset", 0.0);
  const auto length = meta.at("length").get<std::size_t>();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  sig.x.resize(length);
  sig.y.resize(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double xr = get(in), xi = get(in), yr = get(in), yi = get(in);
    sig.x[i] = {xr, xi};
    sig.y[i] = {yr, yi};
  }
  return sig;
}

}  // namespace wdmturbo
