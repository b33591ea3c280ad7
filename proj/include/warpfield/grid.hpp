#pragma once

#include <functional>
#include <string>
#include <vector>

#include "warpfield/util.hpp"

namespace warpfield {

struct GridBox {
  VecD center;
  VecD half_widths;
};

enum class GridKind { FunctionSamples, WeightedPointMasses };

struct PointMass {
  VecD location;
  Complex weight;
};

// Uniformly sampled complex-valued distribution on a box; the substrate for
// wavefront estimation. Sample j along an axis sits at center - half + j·delta
// with delta = 2·half/n, so the box center itself is a grid point. Samples are
// stored row-major with the last axis fastest. Point masses are carried exactly
// as location/weight pairs and rasterized on demand as weight/cellvolume spikes.
class GridDistribution {
 public:
  static GridDistribution function_samples(GridBox box, std::vector<int> resolution,
                                           std::vector<Complex> samples);
  static GridDistribution sample(GridBox box, std::vector<int> resolution,
                                 const std::function<Complex(const VecD&)>& f);
  static GridDistribution point_masses(GridBox box, std::vector<int> resolution,
                                       std::vector<PointMass> masses);

  int dimension() const { return dim_; }
  const GridBox& box() const { return box_; }
  const std::vector<int>& resolution() const { return res_; }
  GridKind kind() const { return kind_; }
  size_t size() const;

  const std::vector<Complex>& samples() const;   // function-samples kind only
  const std::vector<PointMass>& masses() const;  // point-mass kind only
  GridDistribution rasterized() const;           // point masses -> nearest-cell spikes

  VecD spacing() const;
  double cell_volume() const;
  VecD grid_point(const std::vector<int>& idx) const;
  bool contains(const VecD& x) const;

 private:
  int dim_ = 0;
  GridBox box_;
  std::vector<int> res_;
  GridKind kind_ = GridKind::FunctionSamples;
  std::vector<Complex> samples_;
  std::vector<PointMass> masses_;

  void validate_geometry() const;
};

// Serialization: flat little-endian complex64 binary (float32 re/im pairs) next
// to a JSON sidecar holding dimension, box, resolution, kind and the binary's
// filename. Point-mass grids keep their exact locations/weights in the sidecar;
// their binary holds the rasterized samples.
void write_grid(const GridDistribution& g, const std::string& sidecar_path);
GridDistribution read_grid(const std::string& sidecar_path);

}  // namespace warpfield
