#include "qwem/mxc.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "qwem/error.hpp"
#include "qwem/text_io.hpp"

namespace qwem {

void write_mxc(const Eigen::MatrixXd& m, const std::string& name,
               const std::string& provenance, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write matrix file: " + path);
  nlohmann::ordered_json header;
  header["magic"] = "MXC1";
  header["rows"] = m.rows();
  header["cols"] = m.cols();
  header["dtype"] = "f64";
  header["layout"] = "row-major";
  header["name"] = name;
  header["provenance"] = provenance;
  os << header.dump() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) write_f64_le(os, m(r, c));
  if (!os) throw DataError("write failed: " + path);
}

MxcFile read_mxc(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open matrix file: " + path);
  std::string header_line;
  if (!std::getline(is, header_line)) throw DataError("missing header in " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad matrix header in " + path + ": " + e.what());
  }
  if (header.value("magic", "") != std::string("MXC1"))
    throw DataError("not an MXC1 file: " + path);
  if (header.value("dtype", "") != std::string("f64") ||
      header.value("layout", "") != std::string("row-major"))
    throw DataError("unsupported matrix encoding in " + path);

  MxcFile out;
  const auto rows = header.at("rows").get<Eigen::Index>();
  const auto cols = header.at("cols").get<Eigen::Index>();
  if (rows < 0 || cols < 0) throw DataError("negative matrix shape in " + path);
  out.name = header.value("name", "");
  out.provenance = header.value("provenance", "");
  out.matrix.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) out.matrix(r, c) = read_f64_le(is);
  return out;
}

}  // namespace qwem
