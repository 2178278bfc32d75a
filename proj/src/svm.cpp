#include "rfact/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace rfact {

ScalerStats fit_scaler(const Matrix& rows) {
  if (rows.rows() == 0) throw std::runtime_error("scaler: empty training set");
  ScalerStats stats;
  stats.mean = rows.colwise().mean().transpose();
  const auto n = static_cast<double>(rows.rows());
  stats.stddev = ((rows.rowwise() - stats.mean.transpose()).colwise().squaredNorm() / n)
                     .cwiseSqrt()
                     .transpose();
  return stats;
}

Vector apply_scaler(const ScalerStats& stats, const Vector& x) {
  if (x.size() != stats.mean.size()) throw std::runtime_error("scaler: dimension mismatch");
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out[i] = stats.stddev[i] > 0.0 ? (x[i] - stats.mean[i]) / stats.stddev[i] : 0.0;
  return out;
}

Matrix apply_scaler(const ScalerStats& stats, const Matrix& rows) {
  if (rows.cols() != stats.mean.size()) throw std::runtime_error("scaler: dimension mismatch");
  Matrix out(rows.rows(), rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    if (stats.stddev[j] > 0.0)
      out.col(j) = (rows.col(j).array() - stats.mean[j]) / stats.stddev[j];
    else
      out.col(j).setZero();
  }
  return out;
}

double rbf_kernel(const Vector& x, const Vector& y, double gamma) {
  if (x.size() != y.size()) throw std::runtime_error("rbf kernel: dimension mismatch");
  return std::exp(-gamma * (x - y).squaredNorm());
}

Matrix rbf_gram(const Matrix& a, const Matrix& b, double gamma) {
  if (a.cols() != b.cols()) throw std::runtime_error("rbf gram: dimension mismatch");
  const Vector a_sq = a.rowwise().squaredNorm();
  const Vector b_sq = b.rowwise().squaredNorm();
  Matrix gram = -2.0 * (a * b.transpose());
  gram.colwise() += a_sq;
  gram.rowwise() += b_sq.transpose();
  // A self-Gram is symmetric with zero self-distances; round-off in the
  // blocked product breaks both, so restore them exactly.
  if (&a == &b) {
    gram.diagonal().setZero();
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  }
  return (-gamma * gram.cwiseMax(0.0)).array().exp();
}

SmoResult smo_solve(const Matrix& kernel, const Vector& y, double c, double tol,
                    std::int64_t max_iterations) {
  const Eigen::Index n = kernel.rows();
  if (n == 0 || kernel.cols() != n || y.size() != n)
    throw std::runtime_error("smo: malformed kernel/label shapes");
  bool has_pos = false;
  bool has_neg = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] == 1.0)
      has_pos = true;
    else if (y[i] == -1.0)
      has_neg = true;
    else
      throw std::runtime_error("smo: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw std::runtime_error("smo: single-class input");
  if (max_iterations <= 0) max_iterations = 10000 + 1000 * static_cast<std::int64_t>(n);

  SmoResult result;
  result.alpha = Vector::Zero(n);
  Vector f = Vector::Zero(n);  // f_k = Σ_t α_t y_t K_tk, the decision value sans bias

  const auto in_up = [&](Eigen::Index k) {
    return (y[k] > 0 && result.alpha[k] < c) || (y[k] < 0 && result.alpha[k] > 0);
  };
  const auto in_low = [&](Eigen::Index k) {
    return (y[k] > 0 && result.alpha[k] > 0) || (y[k] < 0 && result.alpha[k] < c);
  };

  double m_up = 0.0;
  double m_low = 0.0;
  while (result.iterations < max_iterations) {
    // Maximal violating pair: i maximizes y−f over the set that can grow the
    // bias bound from below, j minimizes it over the set bounding from above.
    Eigen::Index i = -1;
    Eigen::Index j = -1;
    m_up = -std::numeric_limits<double>::infinity();
    m_low = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) {
      const double v = y[k] - f[k];
      if (in_up(k) && v > m_up) {
        m_up = v;
        i = k;
      }
      if (in_low(k) && v < m_low) {
        m_low = v;
        j = k;
      }
    }
    if (i < 0 || j < 0 || m_up - m_low <= tol) break;
    ++result.iterations;

    const double yi = y[i];
    const double yj = y[j];
    double lo;
    double hi;
    if (yi != yj) {
      lo = std::max(0.0, result.alpha[j] - result.alpha[i]);
      hi = std::min(c, c + result.alpha[j] - result.alpha[i]);
    } else {
      lo = std::max(0.0, result.alpha[i] + result.alpha[j] - c);
      hi = std::min(c, result.alpha[i] + result.alpha[j]);
    }
    double eta = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
    if (eta < 1e-12) eta = 1e-12;

    const double aj_old = result.alpha[j];
    const double ai_old = result.alpha[i];
    double aj = aj_old + yj * ((f[i] - yi) - (f[j] - yj)) / eta;
    aj = std::clamp(aj, lo, hi);
    const double ai = ai_old - yi * yj * (aj - aj_old);
    if (aj == aj_old) break;  // numerically stuck; gap is reported below

    result.alpha[i] = ai;
    result.alpha[j] = aj;
    f += (ai - ai_old) * yi * kernel.col(i) + (aj - aj_old) * yj * kernel.col(j);
  }

  result.kkt_violation = std::max(0.0, m_up - m_low);
  result.bias = (std::isfinite(m_up) && std::isfinite(m_low)) ? (m_up + m_low) / 2.0 : 0.0;
  result.objective = result.alpha.sum() - 0.5 * result.alpha.cwiseProduct(y).dot(f);
  return result;
}

int SvmModel::class_index(int class_id) const {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i].id == class_id) return static_cast<int>(i);
  throw std::runtime_error("model does not know class id " + std::to_string(class_id));
}

int Prediction::top_votes() const {
  int best = 0;
  for (int v : votes) best = std::max(best, v);
  return best;
}

SvmModel train(const Matrix& rows, const std::vector<int>& labels,
               const std::vector<ActivityLabel>& classes, std::uint64_t fingerprint,
               const TrainParams& params) {
  if (rows.rows() != static_cast<Eigen::Index>(labels.size()))
    throw std::runtime_error("train: row/label count mismatch");
  if (classes.size() < 2) throw std::runtime_error("train: need at least 2 classes");
  if (!rows.allFinite()) throw std::runtime_error("train: non-finite features");

  SvmModel model;
  model.layout_fingerprint = fingerprint;
  model.classes = classes;
  std::sort(model.classes.begin(), model.classes.end(),
            [](const ActivityLabel& a, const ActivityLabel& b) { return a.id < b.id; });
  model.c = params.C;

  std::vector<std::vector<Eigen::Index>> members(model.classes.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    members[static_cast<std::size_t>(model.class_index(labels[i]))].push_back(
        static_cast<Eigen::Index>(i));
  for (std::size_t k = 0; k < members.size(); ++k)
    if (members[k].empty())
      throw std::runtime_error("train: class '" + model.classes[k].name + "' has no instances");

  model.scaler = fit_scaler(rows);
  const Matrix scaled = apply_scaler(model.scaler, rows);

  model.gamma = params.gamma;
  if (model.gamma <= 0.0) {
    const auto n = static_cast<double>(scaled.rows());
    const double total_variance =
        ((scaled.rowwise() - scaled.colwise().mean()).colwise().squaredNorm() / n).sum();
    model.gamma = total_variance > 0.0 ? 1.0 / total_variance
                                       : 1.0 / static_cast<double>(scaled.cols());
  }

  for (std::size_t p = 0; p < model.classes.size(); ++p)
    for (std::size_t q = p + 1; q < model.classes.size(); ++q) {
      const std::size_t np = members[p].size();
      const std::size_t nq = members[q].size();
      Matrix sub(static_cast<Eigen::Index>(np + nq), scaled.cols());
      Vector y(static_cast<Eigen::Index>(np + nq));
      for (std::size_t r = 0; r < np; ++r) {
        sub.row(static_cast<Eigen::Index>(r)) = scaled.row(members[p][r]);
        y[static_cast<Eigen::Index>(r)] = 1.0;
      }
      for (std::size_t r = 0; r < nq; ++r) {
        sub.row(static_cast<Eigen::Index>(np + r)) = scaled.row(members[q][r]);
        y[static_cast<Eigen::Index>(np + r)] = -1.0;
      }

      const Matrix gram = rbf_gram(sub, sub, model.gamma);
      const SmoResult solved = smo_solve(gram, y, params.C, params.tol, params.max_iterations);

      BinaryClassifier clf;
      clf.class_p = model.classes[p].id;
      clf.class_q = model.classes[q].id;
      clf.bias = solved.bias;
      std::vector<Eigen::Index> sv;
      for (Eigen::Index r = 0; r < solved.alpha.size(); ++r)
        if (solved.alpha[r] > 1e-12) sv.push_back(r);
      clf.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), scaled.cols());
      clf.coefficients.resize(static_cast<Eigen::Index>(sv.size()));
      for (std::size_t r = 0; r < sv.size(); ++r) {
        clf.support_vectors.row(static_cast<Eigen::Index>(r)) = sub.row(sv[r]);
        clf.coefficients[static_cast<Eigen::Index>(r)] = solved.alpha[sv[r]] * y[sv[r]];
      }
      model.classifiers.push_back(std::move(clf));
    }
  return model;
}

SvmModel train(const std::vector<FeatureVector>& instances, const std::vector<ActivityLabel>& labels,
               const TrainParams& params) {
  if (instances.empty()) throw std::runtime_error("train: empty instance set");
  if (instances.size() != labels.size()) throw std::runtime_error("train: instance/label count mismatch");
  const std::uint64_t fingerprint = instances.front().layout_fingerprint;
  Matrix rows(static_cast<Eigen::Index>(instances.size()), instances.front().values.size());
  std::vector<int> ids(labels.size());
  std::vector<ActivityLabel> classes;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].layout_fingerprint != fingerprint)
      throw std::runtime_error("train: inconsistent layout fingerprints among instances");
    rows.row(static_cast<Eigen::Index>(i)) = instances[i].values;
    ids[i] = labels[i].id;
    if (std::none_of(classes.begin(), classes.end(),
                     [&](const ActivityLabel& c) { return c.id == labels[i].id; }))
      classes.push_back(labels[i]);
  }
  return train(rows, ids, classes, fingerprint, params);
}

std::vector<Prediction> predict_batch(const SvmModel& model, const Matrix& rows) {
  if (!rows.allFinite()) throw std::runtime_error("predict: non-finite input");
  const Matrix scaled = apply_scaler(model.scaler, rows);
  const Eigen::Index n = scaled.rows();
  const auto k = static_cast<Eigen::Index>(model.classes.size());

  Eigen::MatrixXi votes = Eigen::MatrixXi::Zero(n, k);
  Matrix confidence = Matrix::Zero(n, k);
  for (const BinaryClassifier& clf : model.classifiers) {
    const Eigen::Index p = model.class_index(clf.class_p);
    const Eigen::Index q = model.class_index(clf.class_q);
    Vector decision = Vector::Constant(n, clf.bias);
    if (clf.support_vectors.rows() > 0)
      decision += rbf_gram(scaled, clf.support_vectors, model.gamma) * clf.coefficients;
    for (Eigen::Index i = 0; i < n; ++i) {
      ++votes(i, decision[i] > 0.0 ? p : q);
      confidence(i, p) += std::abs(decision[i]);
      confidence(i, q) += std::abs(decision[i]);
    }
  }

  std::vector<Prediction> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index cls = 1; cls < k; ++cls) {
      if (votes(i, cls) > votes(i, best) ||
          (votes(i, cls) == votes(i, best) && confidence(i, cls) > confidence(i, best)))
        best = cls;
    }
    Prediction& pred = out[static_cast<std::size_t>(i)];
    pred.label = model.classes[static_cast<std::size_t>(best)];
    pred.votes.assign(static_cast<std::size_t>(k), 0);
    for (Eigen::Index cls = 0; cls < k; ++cls) pred.votes[static_cast<std::size_t>(cls)] = votes(i, cls);
  }
  return out;
}

Prediction predict(const SvmModel& model, const FeatureVector& features) {
  if (features.layout_fingerprint != model.layout_fingerprint)
    throw std::runtime_error("predict: feature layout fingerprint does not match the model");
  Matrix rows(1, features.values.size());
  rows.row(0) = features.values;
  return predict_batch(model, rows).front();
}

namespace {

constexpr char kMagic[8] = {'R', 'F', 'A', 'C', 'T', 'S', 'V', 'M'};

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&v);
    buffer_.append(p, sizeof(v));
  }
  void put_raw(const char* data, std::size_t len) { buffer_.append(data, len); }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    buffer_.append(s);
  }
  void put_vector(const Vector& v) {
    put<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
    buffer_.append(reinterpret_cast<const char*>(v.data()),
                   static_cast<std::size_t>(v.size()) * sizeof(double));
  }
  [[nodiscard]] const std::string& bytes() const { return buffer_; }

 private:
  std::string buffer_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string() {
    const auto len = get<std::uint32_t>();
    need(len);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  Vector get_vector() {
    const auto len = get<std::uint64_t>();
    need(len * sizeof(double));
    Vector v(static_cast<Eigen::Index>(len));
    std::memcpy(v.data(), bytes_.data() + pos_, len * sizeof(double));
    pos_ += len * sizeof(double);
    return v;
  }
  [[nodiscard]] bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("model file: truncated record");
  }

  std::string bytes_;
  std::size_t pos_ = 0;
};

std::uint64_t checksum_of(const char* data, std::size_t len) {
  Fnv1a h;
  h.update(data, len);
  return h.digest();
}

}  // namespace

void save_model(const SvmModel& model, const std::string& path) {
  ByteWriter w;
  w.put_raw(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(SvmModel::kFormatVersion);
  w.put<std::uint64_t>(model.layout_fingerprint);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.classes.size()));
  for (const ActivityLabel& cls : model.classes) {
    w.put<std::int32_t>(cls.id);
    w.put_string(cls.name);
  }
  w.put<double>(model.c);
  w.put<double>(model.gamma);
  w.put_vector(model.scaler.mean);
  w.put_vector(model.scaler.stddev);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.classifiers.size()));
  for (const BinaryClassifier& clf : model.classifiers) {
    w.put<std::int32_t>(clf.class_p);
    w.put<std::int32_t>(clf.class_q);
    w.put<double>(clf.bias);
    w.put_vector(clf.coefficients);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(clf.support_vectors.rows()));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(clf.support_vectors.cols()));
    for (Eigen::Index r = 0; r < clf.support_vectors.rows(); ++r)
      for (Eigen::Index col = 0; col < clf.support_vectors.cols(); ++col)
        w.put<double>(clf.support_vectors(r, col));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  const std::uint64_t checksum = checksum_of(w.bytes().data(), w.bytes().size());
  out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

SvmModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < sizeof(kMagic) + sizeof(std::uint64_t))
    throw std::runtime_error("model file: too short to be valid");
  const std::size_t body_len = bytes.size() - sizeof(std::uint64_t);
  std::uint64_t stored_checksum = 0;
  std::memcpy(&stored_checksum, bytes.data() + body_len, sizeof(stored_checksum));
  if (checksum_of(bytes.data(), body_len) != stored_checksum)
    throw std::runtime_error("model file: checksum mismatch (corrupt or truncated)");

  ByteReader r(bytes.substr(0, body_len));
  char magic[8];
  for (char& ch : magic) ch = r.get<char>();
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("model file: bad magic bytes");
  const auto version = r.get<std::uint32_t>();
  if (version != SvmModel::kFormatVersion)
    throw std::runtime_error("model file: unsupported format version " + std::to_string(version));

  SvmModel model;
  model.layout_fingerprint = r.get<std::uint64_t>();
  const auto n_classes = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_classes; ++i) {
    ActivityLabel cls;
    cls.id = r.get<std::int32_t>();
    cls.name = r.get_string();
    model.classes.push_back(std::move(cls));
  }
  model.c = r.get<double>();
  model.gamma = r.get<double>();
  model.scaler.mean = r.get_vector();
  model.scaler.stddev = r.get_vector();
  const auto n_pairs = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_pairs; ++i) {
    BinaryClassifier clf;
    clf.class_p = r.get<std::int32_t>();
    clf.class_q = r.get<std::int32_t>();
    clf.bias = r.get<double>();
    clf.coefficients = r.get_vector();
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    clf.support_vectors.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::uint64_t row = 0; row < rows; ++row)
      for (std::uint64_t col = 0; col < cols; ++col)
        clf.support_vectors(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
            r.get<double>();
    model.classifiers.push_back(std::move(clf));
  }
  if (!r.exhausted()) throw std::runtime_error("model file: trailing bytes after model body");
  return model;
}

}  // namespace rfact
