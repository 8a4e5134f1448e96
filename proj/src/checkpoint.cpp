#include "cbfnav/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace cbfnav {

namespace {

constexpr char kMagic[8] = {'C', 'B', 'F', 'N', 'P', 'O', 'L', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ConfigError("truncated checkpoint");
  return value;
}

void put_widths(std::ostream& out, const MlpSpec& spec) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.widths.size()));
  for (int w : spec.widths) put<std::int32_t>(out, w);
}

MlpSpec get_widths(std::istream& in) {
  MlpSpec spec;
  std::uint32_t n = get<std::uint32_t>(in);
  if (n < 2 || n > 64) throw ConfigError("corrupt checkpoint: bad layer count");
  for (std::uint32_t i = 0; i < n; ++i) {
    std::int32_t w = get<std::int32_t>(in);
    if (w < 1 || w > 65536) throw ConfigError("corrupt checkpoint: bad width");
    spec.widths.push_back(w);
  }
  return spec;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  if (static_cast<int>(checkpoint.theta.size()) != checkpoint.arch.param_count())
    throw ContractViolation("checkpoint parameter count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put_widths(out, checkpoint.arch.msg_agent);
  put_widths(out, checkpoint.arch.msg_obstacle);
  put_widths(out, checkpoint.arch.update);
  put<std::uint32_t>(out, kActionDim);
  for (double b : {checkpoint.bounds.zeta.lo, checkpoint.bounds.zeta.hi,
                   checkpoint.bounds.eta.lo, checkpoint.bounds.eta.hi})
    put<double>(out, b);
  put<std::uint64_t>(out, checkpoint.theta.size());
  out.write(reinterpret_cast<const char*>(checkpoint.theta.data()),
            static_cast<std::streamsize>(checkpoint.theta.size() * sizeof(double)));
  if (!out) throw ConfigError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read checkpoint '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ConfigError("not a policy checkpoint: '" + path + "'");
  if (get<std::uint32_t>(in) != kVersion)
    throw ConfigError("unsupported checkpoint version in '" + path + "'");

  Checkpoint checkpoint;
  checkpoint.arch.msg_agent = get_widths(in);
  checkpoint.arch.msg_obstacle = get_widths(in);
  checkpoint.arch.update = get_widths(in);
  if (get<std::uint32_t>(in) != kActionDim)
    throw ConfigError("unsupported action dimension in '" + path + "'");
  checkpoint.bounds.zeta.lo = get<double>(in);
  checkpoint.bounds.zeta.hi = get<double>(in);
  checkpoint.bounds.eta.lo = get<double>(in);
  checkpoint.bounds.eta.hi = get<double>(in);

  std::uint64_t count = get<std::uint64_t>(in);
  if (count != static_cast<std::uint64_t>(checkpoint.arch.param_count()))
    throw ConfigError("corrupt checkpoint: parameter count mismatch");
  checkpoint.theta.resize(count);
  in.read(reinterpret_cast<char*>(checkpoint.theta.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw ConfigError("truncated checkpoint");
  return checkpoint;
}

}  // namespace cbfnav
