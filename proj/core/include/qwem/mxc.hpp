#pragma once

#include <Eigen/Dense>
#include <string>

namespace qwem {

// ".mxc" dense matrix container: one-line JSON header
// {magic:"MXC1", rows, cols, dtype:"f64", layout:"row-major", name, provenance}
// followed by rows*cols little-endian doubles in row-major order.
// Vectors (eigenvalue lists etc.) are stored as rows x 1.
struct MxcFile {
  Eigen::MatrixXd matrix;
  std::string name;
  std::string provenance;
};

void write_mxc(const Eigen::MatrixXd& m, const std::string& name,
               const std::string& provenance, const std::string& path);
MxcFile read_mxc(const std::string& path);

}  // namespace qwem
