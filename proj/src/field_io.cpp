#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mwsq/errors.hpp"
#include "mwsq/field.hpp"

namespace mwsq {
namespace {

struct Header {
  int d;
  int N;
  int n;
  FieldKind kind;
};

Header parse_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  std::istringstream hs(line);
  Header h{};
  std::string kind;
  if (!(hs >> h.d >> h.N >> h.n >> kind)) {
    throw InputError("bad field header in " + path.string() + ": '" + line + "'");
  }
  h.kind = parse_field_kind(kind);
  return h;
}

void write_header(std::ostream& out, const CellField& f) {
  out << f.grid().dimension() << ' ' << f.grid().depth() << ' ' << f.grid().vector_dim() << ' '
      << to_string(f.kind()) << '\n';
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
  auto p = path;
  p += ".hdr";
  return p;
}

}  // namespace

void write_field_text(const CellField& f, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  write_header(out, f);
  out << std::setprecision(17);
  std::vector<std::uint64_t> by_lex(f.cells());
  for (std::uint64_t c = 0; c < f.cells(); ++c) by_lex[morton_to_lexicographic(f.grid(), c)] = c;
  for (std::uint64_t lex = 0; lex < f.cells(); ++lex) {
    const auto v = f.cell(by_lex[lex]);
    for (std::size_t a = 0; a < v.size(); ++a) out << (a ? " " : "") << v[a];
    out << '\n';
  }
}

CellField read_field_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  const Header h = parse_header(in, path);
  const GridSpec grid(h.d, h.N, h.n);
  CellField f(grid, h.kind);
  for (std::uint64_t lex = 0; lex < f.cells(); ++lex) {
    auto v = f.cell(lexicographic_to_morton(grid, lex));
    for (double& x : v) {
      if (!(in >> x)) throw InputError("truncated field file " + path.string());
    }
  }
  return CellField(grid, h.kind, std::vector<double>(f.values().begin(), f.values().end()));
}

void write_field_binary(const CellField& f, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little, "binary field I/O assumes little-endian");
  {
    std::ofstream hdr(sidecar(path));
    if (!hdr) throw InputError("cannot open " + sidecar(path).string() + " for writing");
    write_header(hdr, f);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  std::vector<std::uint64_t> by_lex(f.cells());
  for (std::uint64_t c = 0; c < f.cells(); ++c) by_lex[morton_to_lexicographic(f.grid(), c)] = c;
  for (std::uint64_t lex = 0; lex < f.cells(); ++lex) {
    const auto v = f.cell(by_lex[lex]);
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
  }
}

CellField read_field_binary(const std::filesystem::path& path) {
  std::ifstream hdr(sidecar(path));
  if (!hdr) throw InputError("missing sidecar header " + sidecar(path).string());
  const Header h = parse_header(hdr, sidecar(path));
  const GridSpec grid(h.d, h.N, h.n);
  const std::size_t arity = arity_of(h.kind, h.n);
  std::vector<double> values(static_cast<std::size_t>(grid.cells()) * arity);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<double> row(arity);
  for (std::uint64_t lex = 0; lex < grid.cells(); ++lex) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(arity * sizeof(double)));
    if (!in) throw InputError("truncated binary field " + path.string());
    std::memcpy(values.data() + lexicographic_to_morton(grid, lex) * arity, row.data(), arity * sizeof(double));
  }
  return CellField(grid, h.kind, std::move(values));
}

CellField read_field(const std::filesystem::path& path) {
  if (path.extension() == ".bin") return read_field_binary(path);
  return read_field_text(path);
}

}  // namespace mwsq
