#include "oscillab/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include "json.hpp"
#include <sstream>

namespace oscillab {

namespace {

static_assert(std::endian::native == std::endian::little, "binary field format assumes a little-endian host");

template <typename S>
void write_impl(const std::filesystem::path& path, const BasicField<S>& f, FieldEncoding encoding) {
  constexpr bool is_complex = std::is_same_v<S, Complex>;
  nlohmann::json header{{"dimension", f.dimension()},
                        {"resolution", f.resolution()},
                        {"complex", is_complex},
                        {"encoding", encoding == FieldEncoding::binary ? "binary" : "csv"}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot open " + path.string() + " for writing");
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < f.size(); ++i) {
    double parts[2] = {std::real(f[i]), std::imag(f[i])};
    const int count = is_complex ? 2 : 1;
    if (encoding == FieldEncoding::binary) {
      out.write(reinterpret_cast<const char*>(parts), sizeof(double) * count);
    } else {
      std::ostringstream row;
      row.precision(17);
      row << parts[0];
      if (is_complex) row << ',' << parts[1];
      out << row.str() << '\n';
    }
  }
  if (!out) throw ParameterError("failed writing " + path.string());
}

}  // namespace

void write_field(const std::filesystem::path& path, const RealField& f, FieldEncoding encoding) {
  write_impl(path, f, encoding);
}

void write_field(const std::filesystem::path& path, const ComplexField& f, FieldEncoding encoding) {
  write_impl(path, f, encoding);
}

LoadedField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open field file " + path.string());
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const std::exception& e) {
    throw DataError("field file " + path.string() + ": bad header: " + e.what());
  }
  const int dim = header.at("dimension").get<int>();
  const int m = header.at("resolution").get<int>();
  const bool cplx = header.value("complex", false);
  const std::string enc = header.value("encoding", "binary");
  if (dim != 1 && dim != 2) throw DataError("field file: dimension must be 1 or 2");
  if (!is_power_of_two(m)) throw DataError("field file: resolution must be a power of two");
  const std::size_t n = dim == 1 ? m : static_cast<std::size_t>(m) * m;
  ComplexField::Vector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double parts[2] = {0, 0};
    const int count = cplx ? 2 : 1;
    if (enc == "binary") {
      in.read(reinterpret_cast<char*>(parts), sizeof(double) * count);
      if (!in) throw DataError("field file: truncated binary payload");
    } else if (enc == "csv") {
      std::string row;
      if (!std::getline(in, row)) throw DataError("field file: too few CSV rows");
      std::istringstream rs(row);
      char comma;
      rs >> parts[0];
      if (cplx) rs >> comma >> parts[1];
      if (!rs) throw DataError("field file: malformed CSV row " + std::to_string(i + 2));
    } else {
      throw DataError("field file: unknown encoding '" + enc + "'");
    }
    v[static_cast<Eigen::Index>(i)] = Complex(parts[0], parts[1]);
  }
  return {ComplexField(dim, m, std::move(v)), cplx};
}

RealField read_real_field(const std::filesystem::path& path) {
  LoadedField lf = read_field(path);
  if (lf.is_complex) throw DataError("field file " + path.string() + " is complex-valued, a real field is required");
  return RealField(lf.field.dimension(), lf.field.resolution(), lf.field.values().real());
}

}  // namespace oscillab
