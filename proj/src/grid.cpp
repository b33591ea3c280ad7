#include "warpfield/grid.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "warpfield/fft.hpp"

namespace warpfield {

namespace {

size_t total_size(const std::vector<int>& res) {
  size_t n = 1;
  for (int r : res) n *= size_t(r);
  return n;
}

}  // namespace

void GridDistribution::validate_geometry() const {
  require(dim_ >= 1, "grid: dimension must be at least 1");
  require(int(box_.center.size()) == dim_ && int(box_.half_widths.size()) == dim_,
          "grid: box arrays must match the dimension");
  for (double h : box_.half_widths)
    require(std::isfinite(h) && h > 0.0, "grid: half-widths must be positive");
  require(int(res_.size()) == dim_, "grid: resolution list must match the dimension");
  for (int r : res_)
    require(fft::is_pow2(r) && r >= 16, "grid: resolution must be a power of two, at least 16");
}

GridDistribution GridDistribution::function_samples(GridBox box, std::vector<int> resolution,
                                                    std::vector<Complex> samples) {
  GridDistribution g;
  g.dim_ = int(resolution.size());
  g.box_ = std::move(box);
  g.res_ = std::move(resolution);
  g.kind_ = GridKind::FunctionSamples;
  g.validate_geometry();
  require(samples.size() == total_size(g.res_), "grid: sample count does not match resolution");
  for (const Complex& z : samples)
    require(std::isfinite(z.real()) && std::isfinite(z.imag()), "grid: samples must be finite");
  g.samples_ = std::move(samples);
  return g;
}

GridDistribution GridDistribution::sample(GridBox box, std::vector<int> resolution,
                                          const std::function<Complex(const VecD&)>& f) {
  const int dim = int(resolution.size());
  std::vector<Complex> vals(total_size(resolution));
  std::vector<int> idx(dim, 0);
  GridDistribution proto;
  proto.dim_ = dim;
  proto.box_ = box;
  proto.res_ = resolution;
  proto.validate_geometry();
  for (size_t flat = 0; flat < vals.size(); ++flat) {
    vals[flat] = f(proto.grid_point(idx));
    for (int d = dim - 1; d >= 0; --d) {
      if (++idx[d] < resolution[d]) break;
      idx[d] = 0;
    }
  }
  return function_samples(std::move(box), std::move(resolution), std::move(vals));
}

GridDistribution GridDistribution::point_masses(GridBox box, std::vector<int> resolution,
                                                std::vector<PointMass> masses) {
  GridDistribution g;
  g.dim_ = int(resolution.size());
  g.box_ = std::move(box);
  g.res_ = std::move(resolution);
  g.kind_ = GridKind::WeightedPointMasses;
  g.validate_geometry();
  for (const PointMass& m : masses) {
    require(int(m.location.size()) == g.dim_, "grid: point mass location dimension mismatch");
    require(std::isfinite(m.weight.real()) && std::isfinite(m.weight.imag()),
            "grid: point mass weights must be finite");
    if (!g.contains(m.location))
      throw DomainError("grid: point mass lies outside the box");
  }
  g.masses_ = std::move(masses);
  return g;
}

size_t GridDistribution::size() const { return total_size(res_); }

const std::vector<Complex>& GridDistribution::samples() const {
  require(kind_ == GridKind::FunctionSamples, "grid: samples() requires function-samples kind");
  return samples_;
}

const std::vector<PointMass>& GridDistribution::masses() const {
  require(kind_ == GridKind::WeightedPointMasses, "grid: masses() requires point-mass kind");
  return masses_;
}

GridDistribution GridDistribution::rasterized() const {
  if (kind_ == GridKind::FunctionSamples) return *this;
  std::vector<Complex> vals(size(), Complex{0.0, 0.0});
  const VecD delta = spacing();
  const double cv = cell_volume();
  for (const PointMass& m : masses_) {
    size_t flat = 0;
    for (int d = 0; d < dim_; ++d) {
      const double x0 = box_.center[d] - box_.half_widths[d];
      long j = std::lround((m.location[d] - x0) / delta[d]);
      if (j < 0) j = 0;
      if (j >= res_[d]) j = res_[d] - 1;
      flat = flat * size_t(res_[d]) + size_t(j);
    }
    vals[flat] += m.weight / cv;
  }
  GridDistribution g = *this;
  g.kind_ = GridKind::FunctionSamples;
  g.masses_.clear();
  g.samples_ = std::move(vals);
  return g;
}

VecD GridDistribution::spacing() const {
  VecD d(dim_);
  for (int i = 0; i < dim_; ++i) d[i] = 2.0 * box_.half_widths[i] / double(res_[i]);
  return d;
}

double GridDistribution::cell_volume() const {
  double v = 1.0;
  for (double d : spacing()) v *= d;
  return v;
}

VecD GridDistribution::grid_point(const std::vector<int>& idx) const {
  VecD x(dim_);
  for (int d = 0; d < dim_; ++d)
    x[d] = box_.center[d] - box_.half_widths[d] +
           double(idx[d]) * 2.0 * box_.half_widths[d] / double(res_[d]);
  return x;
}

bool GridDistribution::contains(const VecD& x) const {
  for (int d = 0; d < dim_; ++d)
    if (std::abs(x[d] - box_.center[d]) > box_.half_widths[d]) return false;
  return true;
}

// ---- serialization --------------------------------------------------------

static_assert(std::endian::native == std::endian::little,
              "grid serialization assumes a little-endian host");

namespace {

std::filesystem::path binary_path_for(const std::filesystem::path& sidecar) {
  std::filesystem::path p = sidecar;
  if (p.extension() == ".json") p.replace_extension(".bin");
  else p += ".bin";
  return p;
}

const char* kind_tag(GridKind k) {
  return k == GridKind::FunctionSamples ? "function-samples" : "weighted-point-masses";
}

}  // namespace

void write_grid(const GridDistribution& g, const std::string& sidecar_path) {
  const std::filesystem::path sidecar(sidecar_path);
  const std::filesystem::path binary = binary_path_for(sidecar);

  const GridDistribution rast = g.rasterized();
  {
    std::ofstream out(binary, std::ios::binary | std::ios::trunc);
    require(out.good(), "grid: cannot open binary file for writing: " + binary.string());
    for (const Complex& z : rast.samples()) {
      const float re = float(z.real()), im = float(z.imag());
      out.write(reinterpret_cast<const char*>(&re), sizeof(float));
      out.write(reinterpret_cast<const char*>(&im), sizeof(float));
    }
    require(out.good(), "grid: write failed: " + binary.string());
  }

  nlohmann::json j;
  j["dimension"] = g.dimension();
  j["box"] = {{"center", g.box().center}, {"half_widths", g.box().half_widths}};
  j["resolution"] = g.resolution();
  j["kind"] = kind_tag(g.kind());
  j["binary"] = binary.filename().string();
  j["count"] = g.size();
  if (g.kind() == GridKind::WeightedPointMasses) {
    nlohmann::json arr = nlohmann::json::array();
    for (const PointMass& m : g.masses())
      arr.push_back({{"location", m.location},
                     {"weight_re", m.weight.real()},
                     {"weight_im", m.weight.imag()}});
    j["masses"] = arr;
  }
  std::ofstream out(sidecar);
  require(out.good(), "grid: cannot open sidecar for writing: " + sidecar.string());
  out << j.dump(2) << "\n";
}

GridDistribution read_grid(const std::string& sidecar_path) {
  const std::filesystem::path sidecar(sidecar_path);
  std::ifstream in(sidecar);
  require(in.good(), "grid: cannot open sidecar: " + sidecar.string());
  nlohmann::json j;
  in >> j;

  GridBox box{j.at("box").at("center").get<VecD>(),
              j.at("box").at("half_widths").get<VecD>()};
  std::vector<int> res = j.at("resolution").get<std::vector<int>>();
  const std::string kind = j.at("kind").get<std::string>();

  if (kind == "weighted-point-masses") {
    std::vector<PointMass> masses;
    for (const auto& m : j.at("masses")) {
      masses.push_back({m.at("location").get<VecD>(),
                        Complex(m.at("weight_re").get<double>(),
                                m.at("weight_im").get<double>())});
    }
    return GridDistribution::point_masses(std::move(box), std::move(res), std::move(masses));
  }
  require(kind == "function-samples", "grid: unknown kind tag: " + kind);

  const std::filesystem::path binary =
      sidecar.parent_path() / j.at("binary").get<std::string>();
  std::ifstream bin(binary, std::ios::binary);
  require(bin.good(), "grid: cannot open binary: " + binary.string());
  size_t count = 1;
  for (int r : res) count *= size_t(r);
  std::vector<Complex> samples(count);
  for (size_t i = 0; i < count; ++i) {
    float re = 0, im = 0;
    bin.read(reinterpret_cast<char*>(&re), sizeof(float));
    bin.read(reinterpret_cast<char*>(&im), sizeof(float));
    require(bool(bin), "grid: binary file shorter than the declared sample count");
    samples[i] = Complex(double(re), double(im));
  }
  return GridDistribution::function_samples(std::move(box), std::move(res), std::move(samples));
}

}  // namespace warpfield
