#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bpfd {

/// Compressed-row sparse matrix with sorted column indices per row.
struct Csr {
  int n = 0;  // square
  std::vector<int> rowptr;
  std::vector<int> col;
  std::vector<double> val;

  Csr() = default;
  explicit Csr(int n_) : n(n_), rowptr(n_ + 1, 0) {}

  int nnz() const { return static_cast<int>(col.size()); }

  std::span<const int> row_cols(int r) const {
    return {col.data() + rowptr[r], col.data() + rowptr[r + 1]};
  }
  std::span<const double> row_vals(int r) const {
    return {val.data() + rowptr[r], val.data() + rowptr[r + 1]};
  }

  double at(int r, int c) const {
    for (int k = rowptr[r]; k < rowptr[r + 1]; ++k)
      if (col[k] == c) return val[k];
    return 0.0;
  }

  void matvec(std::span<const double> x, std::span<double> y) const {
    for (int r = 0; r < n; ++r) {
      double s = 0.0;
      for (int k = rowptr[r]; k < rowptr[r + 1]; ++k) s += val[k] * x[col[k]];
      y[r] = s;
    }
  }

  std::vector<double> matvec(std::span<const double> x) const {
    std::vector<double> y(n);
    matvec(x, y);
    return y;
  }

  double row_abs_max(int r) const {
    double m = 0.0;
    for (int k = rowptr[r]; k < rowptr[r + 1]; ++k)
      m = std::max(m, std::abs(val[k]));
    return m;
  }
};

/// Row-major triplet accumulator; duplicate entries are summed.
struct CsrBuilder {
  int n;
  std::vector<std::vector<std::pair<int, double>>> rows;

  explicit CsrBuilder(int n_) : n(n_), rows(n_) {}

  void add(int r, int c, double v) {
    if (r < 0 || r >= n || c < 0 || c >= n)
      throw std::out_of_range("CsrBuilder::add");
    rows[r].emplace_back(c, v);
  }

  Csr build(bool drop_zeros = false) const {
    Csr m(n);
    std::vector<std::pair<int, double>> tmp;
    for (int r = 0; r < n; ++r) {
      tmp = rows[r];
      std::sort(tmp.begin(), tmp.end(),
                [](auto& a, auto& b) { return a.first < b.first; });
      size_t w = 0;
      for (size_t k = 0; k < tmp.size(); ++k) {
        if (w > 0 && tmp[w - 1].first == tmp[k].first)
          tmp[w - 1].second += tmp[k].second;
        else
          tmp[w++] = tmp[k];
      }
      tmp.resize(w);
      for (auto& [c, v] : tmp) {
        if (drop_zeros && v == 0.0) continue;
        m.col.push_back(c);
        m.val.push_back(v);
      }
      m.rowptr[r + 1] = static_cast<int>(m.col.size());
    }
    return m;
  }
};

/// Matrix Market coordinate export (1-based indices).
inline void write_matrix_market(const Csr& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.n << " " << m.n << " " << m.nnz() << "\n";
  char buf[64];
  for (int r = 0; r < m.n; ++r)
    for (int k = m.rowptr[r]; k < m.rowptr[r + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", r + 1, m.col[k] + 1,
                    m.val[k]);
      out << buf;
    }
}

}  // namespace bpfd
