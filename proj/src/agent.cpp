#include "gwla/agent.hpp"

#include <lapacke.h>

#include <cmath>
#include <map>
#include <stdexcept>

namespace gwla {

namespace {

/// First two principal components of the (V,K) row matrix, deterministic
/// sign (largest-|entry| component positive in each eigenvector).
Tensor pca2(const Tensor& rows) {
  const int v = rows.dim(0), k = rows.dim(1);
  std::vector<double> centered(static_cast<size_t>(v) * k);
  for (int j = 0; j < k; ++j) {
    double mean = 0;
    for (int i = 0; i < v; ++i) mean += rows[static_cast<size_t>(i) * k + j];
    mean /= v;
    for (int i = 0; i < v; ++i)
      centered[static_cast<size_t>(i) * k + j] = rows[static_cast<size_t>(i) * k + j] - mean;
  }
  std::vector<double> cov(static_cast<size_t>(k) * k, 0.0);
  for (int i = 0; i < v; ++i) {
    const double* r = centered.data() + static_cast<size_t>(i) * k;
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) cov[static_cast<size_t>(a) * k + b] += r[a] * r[b];
  }
  double denom = v > 1 ? v - 1 : 1;
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b) {
      cov[static_cast<size_t>(a) * k + b] /= denom;
      cov[static_cast<size_t>(b) * k + a] = cov[static_cast<size_t>(a) * k + b];
    }
  std::vector<double> eigvals(k);
  int info = LAPACKE_dsyev(LAPACK_ROW_MAJOR, 'V', 'U', k, cov.data(), k, eigvals.data());
  if (info != 0) throw std::runtime_error("pca: eigendecomposition failed, info " + std::to_string(info));

  // dsyev returns ascending eigenvalues; columns are eigenvectors.
  Tensor out({v, 2});
  for (int comp = 0; comp < 2; ++comp) {
    int col = k - 1 - comp;
    double mx = 0;
    int mi = 0;
    for (int a = 0; a < k; ++a) {
      double e = cov[static_cast<size_t>(a) * k + col];
      if (std::abs(e) > std::abs(mx)) {
        mx = e;
        mi = a;
      }
    }
    double sign = cov[static_cast<size_t>(mi) * k + col] < 0 ? -1.0 : 1.0;
    for (int i = 0; i < v; ++i) {
      double dot = 0;
      for (int a = 0; a < k; ++a)
        dot += centered[static_cast<size_t>(i) * k + a] * cov[static_cast<size_t>(a) * k + col];
      out[static_cast<size_t>(i) * 2 + comp] = static_cast<float>(dot * sign);
    }
  }
  return out;
}

}  // namespace

EmbeddingExport export_embeddings(const ParamStore& params, const Vocabulary& vocab) {
  const Tensor& table = params.value("lang.embed");
  const int v = vocab.size();
  if (table.dim(0) < v)
    throw std::invalid_argument("export_embeddings: table rows " + std::to_string(table.dim(0)) +
                                " < vocabulary size " + std::to_string(v));
  const int k = table.dim(1);
  EmbeddingExport out;
  out.vectors = Tensor({v, k});
  for (int i = 0; i < v; ++i) {
    out.words.push_back(vocab.word(i));
    out.classes.push_back(vocab.cls(i));
    const float* src = table.ptr() + static_cast<size_t>(i) * k;
    std::copy(src, src + k, out.vectors.ptr() + static_cast<size_t>(i) * k);
  }
  out.pca = pca2(out.vectors);
  return out;
}

double nearest_centroid_purity(const Tensor& vectors, const std::vector<WordClass>& classes) {
  const int v = vectors.dim(0), k = vectors.dim(1);
  if (static_cast<int>(classes.size()) != v)
    throw std::invalid_argument("nearest_centroid_purity: class list length mismatch");
  std::map<WordClass, std::vector<double>> centroid;
  std::map<WordClass, int> count;
  for (int i = 0; i < v; ++i) {
    auto& c = centroid[classes[i]];
    if (c.empty()) c.assign(k, 0.0);
    for (int j = 0; j < k; ++j) c[j] += vectors[static_cast<size_t>(i) * k + j];
    ++count[classes[i]];
  }
  for (auto& [cls, c] : centroid)
    for (double& x : c) x /= count[cls];

  int correct = 0;
  for (int i = 0; i < v; ++i) {
    double best = 0;
    WordClass best_cls = classes[i];
    bool first = true;
    for (const auto& [cls, c] : centroid) {
      double d = 0;
      for (int j = 0; j < k; ++j) {
        double diff = vectors[static_cast<size_t>(i) * k + j] - c[j];
        d += diff * diff;
      }
      if (first || d < best) {
        best = d;
        best_cls = cls;
        first = false;
      }
    }
    if (best_cls == classes[i]) ++correct;
  }
  return static_cast<double>(correct) / v;
}

}  // namespace gwla
