#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "csde/grid.hpp"

namespace csde {

// CSV: optional '#' comment lines, then header t,x1..xd,v (or v1..vk), one
// row per space-time node. Samples are written with round-trip precision.
void write_csv(const GridFunction& f, std::ostream& os, const std::string& comment = "");
GridFunction read_csv(std::istream& is);

// Binary container: "CSDE", u32 version, u32 kind, kind-specific header,
// u32 metadata length + JSON metadata, then little-endian f64 samples.
inline constexpr std::uint32_t kBinaryVersion = 1;
enum class BinaryKind : std::uint32_t { field = 0, ensemble = 1 };

void write_binary(const GridFunction& f, std::ostream& os, const std::string& metadata = "{}");

struct LoadedField {
  GridFunction field;
  std::string metadata;
};
LoadedField read_binary(std::istream& is);

// Chooses CSV or binary by extension (.csv / anything else).
void save_field(const std::filesystem::path& path, const GridFunction& f, const std::string& metadata = "{}");
LoadedField load_field(const std::filesystem::path& path);

namespace io {

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void bytes(const std::string& s);
  void f64s(const std::vector<double>& v);

 private:
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string bytes(std::size_t n);
  std::vector<double> f64s(std::size_t n);

 private:
  void read(void* dst, std::size_t n);
  std::istream& is_;
};

// Writes magic + version + kind; reads and checks them.
void write_preamble(Writer& w, BinaryKind kind);
BinaryKind read_preamble(Reader& r);

}  // namespace io

}  // namespace csde
