#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gwla {

inline std::string shape_to_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

inline int64_t numel_of(const std::vector<int>& shape) {
  int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("negative dimension in shape " + shape_to_string(shape));
    n *= d;
  }
  return n;
}

/// Dense row-major tensor. Scalar type is float for training and double for
/// gradient checking; everything that computes is templated on it.
template <typename S>
struct TensorT {
  std::vector<int> shape;
  std::vector<S> data;

  TensorT() = default;
  explicit TensorT(std::vector<int> shape_in)
      : shape(std::move(shape_in)), data(static_cast<size_t>(numel_of(shape)), S(0)) {}
  TensorT(std::vector<int> shape_in, std::vector<S> values)
      : shape(std::move(shape_in)), data(std::move(values)) {
    if (static_cast<int64_t>(data.size()) != numel_of(shape))
      throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                  " does not match shape " + shape_to_string(shape));
  }

  static TensorT zeros(std::vector<int> shape_in) { return TensorT(std::move(shape_in)); }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape.at(static_cast<size_t>(i)); }

  S* ptr() { return data.data(); }
  const S* ptr() const { return data.data(); }

  S& operator[](size_t i) { return data[i]; }
  const S& operator[](size_t i) const { return data[i]; }

  void fill(S v) { std::fill(data.begin(), data.end(), v); }
  void zero() { fill(S(0)); }

  bool same_shape(const TensorT& other) const { return shape == other.shape; }

  std::string shape_str() const { return shape_to_string(shape); }

  /// Lossy copy between scalar types (float <-> double).
  template <typename S2>
  TensorT<S2> cast() const {
    TensorT<S2> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<S2>(data[i]);
    return out;
  }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

template <typename S>
bool all_finite(const TensorT<S>& t) {
  for (S v : t.data)
    if (!std::isfinite(static_cast<double>(v))) return false;
  return true;
}

template <typename S>
void check_same_shape(const TensorT<S>& a, const TensorT<S>& b, const char* what) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " +
                                b.shape_str());
}

}  // namespace gwla
