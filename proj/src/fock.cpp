#include "warpfield/fock.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <filesystem>

#include <json.hpp>

namespace warpfield {

using nlohmann::json;

ModeLattice ModeLattice::create(double mass, double delta_p, int half_modes) {
  require(mass > 0.0, "ModeLattice: mass must be positive");
  require(delta_p > 0.0, "ModeLattice: momentum spacing must be positive");
  require(half_modes >= 1, "ModeLattice: at least one momentum pair");
  ModeLattice l;
  l.mass = mass;
  l.delta_p = delta_p;
  for (int j = half_modes; j >= 1; --j) l.momenta.push_back(-j * delta_p);
  for (int j = 1; j <= half_modes; ++j) l.momenta.push_back(j * delta_p);
  return l;
}

double ModeLattice::omega(int mode) const {
  const double p = momenta.at(mode);
  return std::sqrt(p * p + mass * mass);
}

VecD ModeLattice::on_shell(int mode) const { return {omega(mode), momenta.at(mode)}; }

FockBasis FockBasis::create(const ModeLattice& lattice, int n_max, int n_total) {
  require(n_max >= 1 && n_total >= 1, "FockBasis: cutoffs must be positive");
  FockBasis b;
  b.lattice = lattice;
  b.n_max = n_max;
  b.n_total = n_total;

  const int modes = lattice.mode_count();
  std::vector<int> cur(modes, 0);
  std::vector<std::vector<int>> all;
  std::function<void(int, int)> rec = [&](int pos, int used) {
    if (pos == modes) {
      all.push_back(cur);
      return;
    }
    for (int n = 0; n <= std::min(n_max, n_total - used); ++n) {
      cur[pos] = n;
      rec(pos + 1, used + n);
    }
    cur[pos] = 0;
  };
  rec(0, 0);

  auto total = [](const std::vector<int>& s) {
    int t = 0;
    for (int n : s) t += n;
    return t;
  };
  std::sort(all.begin(), all.end(), [&](const auto& x, const auto& y) {
    const int tx = total(x), ty = total(y);
    if (tx != ty) return tx < ty;
    return x < y;
  });
  b.states = std::move(all);
  for (size_t i = 0; i < b.states.size(); ++i) b.index_[b.states[i]] = i;
  return b;
}

std::optional<size_t> FockBasis::index_of(const std::vector<int>& occupation) const {
  auto it = index_.find(occupation);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int FockBasis::total_number(size_t i) const {
  int t = 0;
  for (int n : states.at(i)) t += n;
  return t;
}

VecD FockBasis::total_momentum(size_t i) const {
  VecD p{0.0, 0.0};
  const auto& s = states.at(i);
  for (size_t m = 0; m < s.size(); ++m) {
    if (s[m] == 0) continue;
    p[0] += s[m] * lattice.omega(int(m));
    p[1] += s[m] * lattice.momenta[m];
  }
  return p;
}

FockOperator FockOperator::zero(size_t dim) {
  FockOperator op;
  op.dim = dim;
  op.a.assign(dim * dim, Complex(0.0));
  return op;
}

FockOperator FockOperator::identity(size_t dim) {
  FockOperator op = zero(dim);
  for (size_t i = 0; i < dim; ++i) op.at(i, i) = Complex(1.0);
  return op;
}

FockOperator op_add(const FockOperator& x, const FockOperator& y) {
  require(x.dim == y.dim, "op_add: dimension mismatch");
  FockOperator r = x;
  for (size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
  return r;
}

FockOperator op_scale(Complex c, const FockOperator& x) {
  FockOperator r = x;
  for (auto& v : r.a) v *= c;
  return r;
}

FockOperator op_mul(const FockOperator& x, const FockOperator& y) {
  require(x.dim == y.dim, "op_mul: dimension mismatch");
  FockOperator r = FockOperator::zero(x.dim);
  const size_t n = x.dim;
  for (size_t i = 0; i < n; ++i)
    for (size_t k = 0; k < n; ++k) {
      const Complex xik = x.at(i, k);
      if (xik == Complex(0.0)) continue;
      for (size_t j = 0; j < n; ++j) r.at(i, j) += xik * y.at(k, j);
    }
  return r;
}

FockOperator op_adjoint(const FockOperator& x) {
  FockOperator r = FockOperator::zero(x.dim);
  for (size_t i = 0; i < x.dim; ++i)
    for (size_t j = 0; j < x.dim; ++j) r.at(j, i) = std::conj(x.at(i, j));
  return r;
}

std::vector<Complex> op_apply(const FockOperator& x, const std::vector<Complex>& v) {
  require(v.size() == x.dim, "op_apply: dimension mismatch");
  std::vector<Complex> r(x.dim, Complex(0.0));
  for (size_t i = 0; i < x.dim; ++i)
    for (size_t j = 0; j < x.dim; ++j) r[i] += x.at(i, j) * v[j];
  return r;
}

double op_frobenius(const FockOperator& x) {
  double s = 0.0;
  for (const auto& v : x.a) s += std::norm(v);
  return std::sqrt(s);
}

double op_max_abs_diff(const FockOperator& x, const FockOperator& y) {
  require(x.dim == y.dim, "op_max_abs_diff: dimension mismatch");
  double m = 0.0;
  for (size_t i = 0; i < x.a.size(); ++i) m = std::max(m, std::abs(x.a[i] - y.a[i]));
  return m;
}

Complex inner(const std::vector<Complex>& x, const std::vector<Complex>& y) {
  require(x.size() == y.size(), "inner: dimension mismatch");
  Complex s(0.0);
  for (size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

FockOperator annihilator(const FockBasis& basis, int mode) {
  require(mode >= 0 && mode < basis.lattice.mode_count(), "annihilator: mode out of range");
  FockOperator op = FockOperator::zero(basis.dimension());
  for (size_t j = 0; j < basis.states.size(); ++j) {
    const auto& s = basis.states[j];
    if (s[mode] == 0) continue;
    auto t = s;
    --t[mode];
    auto i = basis.index_of(t);
    // downward closure guarantees the lowered tuple is present
    op.at(*i, j) = Complex(std::sqrt(double(s[mode])));
  }
  return op;
}

FockOperator creator(const FockBasis& basis, int mode) {
  require(mode >= 0 && mode < basis.lattice.mode_count(), "creator: mode out of range");
  FockOperator op = FockOperator::zero(basis.dimension());
  for (size_t j = 0; j < basis.states.size(); ++j) {
    const auto& s = basis.states[j];
    auto t = s;
    ++t[mode];
    auto i = basis.index_of(t);
    if (!i) continue;  // cutoff boundary: amplitude dropped, accounted as leakage
    op.at(*i, j) = Complex(std::sqrt(double(s[mode] + 1)));
  }
  return op;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "operator serialization assumes little-endian float32");

std::filesystem::path binary_path_for(const std::filesystem::path& sidecar) {
  auto p = sidecar;
  if (p.extension() == ".json")
    p.replace_extension(".bin");
  else
    p += ".bin";
  return p;
}

}  // namespace

void write_operator(const FockOperator& op, const std::string& sidecar_path) {
  const std::filesystem::path sidecar(sidecar_path);
  const auto bin = binary_path_for(sidecar);

  std::vector<float> buf;
  buf.reserve(op.a.size() * 2);
  for (const auto& z : op.a) {
    buf.push_back(float(z.real()));
    buf.push_back(float(z.imag()));
  }
  FILE* f = std::fopen(bin.string().c_str(), "wb");
  require(f != nullptr, "write_operator: cannot open " + bin.string());
  const size_t written = std::fwrite(buf.data(), sizeof(float), buf.size(), f);
  std::fclose(f);
  require(written == buf.size(), "write_operator: short write");

  json j;
  j["dimension"] = op.dim;
  j["dtype"] = "complex64";
  j["binary"] = bin.filename().string();
  j["count"] = op.a.size();
  FILE* s = std::fopen(sidecar.string().c_str(), "wb");
  require(s != nullptr, "write_operator: cannot open " + sidecar.string());
  const std::string text = j.dump(2);
  std::fwrite(text.data(), 1, text.size(), s);
  std::fclose(s);
}

FockOperator read_operator(const std::string& sidecar_path) {
  const std::filesystem::path sidecar(sidecar_path);
  FILE* s = std::fopen(sidecar.string().c_str(), "rb");
  require(s != nullptr, "read_operator: cannot open " + sidecar.string());
  std::string text;
  char chunk[4096];
  size_t got;
  while ((got = std::fread(chunk, 1, sizeof chunk, s)) > 0) text.append(chunk, got);
  std::fclose(s);
  json j = json::parse(text);

  FockOperator op = FockOperator::zero(j.at("dimension").get<size_t>());
  const size_t count = j.at("count").get<size_t>();
  require(count == op.a.size(), "read_operator: sidecar count mismatch");

  auto bin = sidecar.parent_path() / j.at("binary").get<std::string>();
  FILE* f = std::fopen(bin.string().c_str(), "rb");
  require(f != nullptr, "read_operator: cannot open " + bin.string());
  std::vector<float> buf(count * 2);
  const size_t read = std::fread(buf.data(), sizeof(float), buf.size(), f);
  std::fclose(f);
  require(read == buf.size(), "read_operator: binary length mismatch");
  for (size_t i = 0; i < count; ++i) op.a[i] = Complex(buf[2 * i], buf[2 * i + 1]);
  return op;
}

}  // namespace warpfield
