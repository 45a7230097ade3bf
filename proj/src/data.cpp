#include "mmcon/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "mmcon/rng.hpp"
#include "mmcon/textio.hpp"

namespace mmcon {

void SyntheticConfig::validate() const {
  if (n_patients < 1) throw InvalidConfig("data: n_patients must be positive");
  if (n_views < 1) throw InvalidConfig("data: n_views must be positive");
  if (feature_dim < 1) throw InvalidConfig("data: feature_dim must be positive");
  if (!(class_balance > 0.0 && class_balance < 1.0))
    throw InvalidConfig("data: class_balance must lie in (0, 1)");
  if (cluster_separation < 0.0)
    throw InvalidConfig("data: cluster_separation must be >= 0");
  if (noise_sigma < 0.0) throw InvalidConfig("data: noise_sigma must be >= 0");
  if (label_noise < 0.0 || label_noise >= 0.5)
    throw InvalidConfig("data: label_noise must lie in [0, 0.5)");
}

int Dataset::n_views() const {
  return samples.empty() ? 0 : static_cast<int>(samples.front().views.size());
}

int Dataset::feature_dim() const {
  if (samples.empty() || samples.front().views.empty()) return 0;
  return static_cast<int>(samples.front().views.front().size());
}

namespace {

// Orthogonal matrix from Gram-Schmidt over a seeded Gaussian draw.
Matrix random_orthogonal(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix q(d, d);
  for (int col = 0; col < d; ++col) {
    Vec v(static_cast<size_t>(d));
    double n = 0.0;
    do {
      for (double& x : v) x = gauss(rng);
      for (int prev = 0; prev < col; ++prev) {
        double proj = 0.0;
        for (int r = 0; r < d; ++r) proj += q.at(r, prev) * v[static_cast<size_t>(r)];
        for (int r = 0; r < d; ++r) v[static_cast<size_t>(r)] -= proj * q.at(r, prev);
      }
      n = 0.0;
      for (double x : v) n += x * x;
      n = std::sqrt(n);
    } while (n < 1e-8);
    for (int r = 0; r < d; ++r) q.at(r, col) = v[static_cast<size_t>(r)] / n;
  }
  return q;
}

Vec matvec(const Matrix& m, const Vec& x) {
  Vec out(static_cast<size_t>(m.rows), 0.0);
  for (int r = 0; r < m.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < m.cols; ++c) s += m.at(r, c) * x[static_cast<size_t>(c)];
    out[static_cast<size_t>(r)] = s;
  }
  return out;
}

std::string make_patient_id(int index, int n_total) {
  int width = 4;
  for (int scale = 10000; n_total > scale; scale *= 10) ++width;
  std::string digits = std::to_string(index);
  return "P" + std::string(static_cast<size_t>(width) - digits.size(), '0') + digits;
}

}  // namespace

Dataset generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();

  const int n = cfg.n_patients;
  const int m = cfg.n_views;
  const int d = cfg.feature_dim;

  std::vector<Matrix> rotations;
  rotations.reserve(static_cast<size_t>(m));
  for (int v = 0; v < m; ++v)
    rotations.push_back(random_orthogonal(d, mix_seed(cfg.per_view_rotation_seed,
                                                      static_cast<std::uint64_t>(v))));

  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // exactly round(class_balance * n) positives before label noise
  const int n_pos = static_cast<int>(std::lround(cfg.class_balance * n));
  std::vector<int> labels(static_cast<size_t>(n), 0);
  {
    const std::vector<int> order = shuffled_indices(n, rng);
    for (int i = 0; i < n_pos; ++i) labels[static_cast<size_t>(order[static_cast<size_t>(i)])] = 1;
  }

  Dataset ds;
  ds.provenance = Provenance::Synthetic;
  ds.samples.reserve(static_cast<size_t>(n));
  const double half = cfg.cluster_separation / 2.0;
  for (int i = 0; i < n; ++i) {
    MultiViewSample s;
    s.patient_id = make_patient_id(i, n);
    s.label = labels[static_cast<size_t>(i)];

    Vec latent(static_cast<size_t>(d));
    for (double& x : latent) x = gauss(rng);
    latent[0] += s.label == 1 ? half : -half;

    s.views.reserve(static_cast<size_t>(m));
    for (int v = 0; v < m; ++v) {
      Vec x = matvec(rotations[static_cast<size_t>(v)], latent);
      if (cfg.noise_sigma > 0.0)
        for (double& e : x) e += cfg.noise_sigma * gauss(rng);
      s.views.push_back(std::move(x));
    }
    ds.samples.push_back(std::move(s));
  }

  if (cfg.label_noise > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& s : ds.samples)
      if (u(rng) < cfg.label_noise) s.label = 1 - s.label;
  }
  return ds;
}

void write_dataset(const Dataset& ds, const std::string& path) {
  if (ds.samples.empty()) throw InvalidConfig("write_dataset: empty dataset");
  const int m = ds.n_views();
  const int d = ds.feature_dim();

  std::ofstream out(path);
  if (!out) throw IoError("write_dataset: cannot open '" + path + "' for writing");

  out << "patient_id,view_id,label";
  for (int f = 0; f < d; ++f) out << ",f" << f;
  out << "\n";
  for (const auto& s : ds.samples) {
    for (int v = 0; v < m; ++v) {
      out << s.patient_id << ',' << v << ',' << s.label;
      for (double x : s.views[static_cast<size_t>(v)]) out << ',' << fmt_g17(x);
      out << "\n";
    }
  }
  if (!out) throw IoError("write_dataset: write to '" + path + "' failed");
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_dataset: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw MalformedHeader("read_dataset: empty file '" + path + "'");
  const std::vector<std::string> head = split(trim(line), ',');
  if (head.size() < 4 || head[0] != "patient_id" || head[1] != "view_id" || head[2] != "label")
    throw MalformedHeader("read_dataset: header must start patient_id,view_id,label,f0,...");
  const int d = static_cast<int>(head.size()) - 3;
  for (int f = 0; f < d; ++f)
    if (head[static_cast<size_t>(f) + 3] != "f" + std::to_string(f))
      throw MalformedHeader("read_dataset: feature columns must be named f0..f" +
                            std::to_string(d - 1));

  struct Row {
    std::string pid;
    int view;
    int label;
    Vec features;
  };
  std::vector<Row> rows;
  std::unordered_set<std::string> seen;
  int max_view = 0;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::vector<std::string> cells = split(t, ',');
    const std::string where = "row " + std::to_string(line_no);
    if (static_cast<int>(cells.size()) != d + 3)
      throw InconsistentRow("read_dataset: " + where + " has " +
                            std::to_string(cells.size()) + " fields, expected " +
                            std::to_string(d + 3));
    Row r;
    r.pid = cells[0];
    r.view = static_cast<int>(parse_int(cells[1], where + " view_id"));
    r.label = static_cast<int>(parse_int(cells[2], where + " label"));
    if (r.view < 0) throw InconsistentRow("read_dataset: " + where + " negative view_id");
    if (r.label != 0 && r.label != 1)
      throw InconsistentRow("read_dataset: " + where + " label must be 0 or 1");
    r.features.reserve(static_cast<size_t>(d));
    for (int f = 0; f < d; ++f) {
      const double x = parse_double(cells[static_cast<size_t>(f) + 3], where + " f" + std::to_string(f));
      if (!std::isfinite(x))
        throw InconsistentRow("read_dataset: " + where + " has a non-finite feature");
      r.features.push_back(x);
    }
    const std::string key = r.pid + "\x1f" + std::to_string(r.view);
    if (!seen.insert(key).second)
      throw DuplicatePatient("read_dataset: repeated (patient_id, view_id) = (" + r.pid +
                             ", " + std::to_string(r.view) + ")");
    max_view = std::max(max_view, r.view);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw MalformedHeader("read_dataset: no data rows in '" + path + "'");

  const int m = max_view + 1;
  Dataset ds;
  ds.provenance = Provenance::File;
  std::unordered_map<std::string, size_t> index_of;
  for (const Row& r : rows) {
    auto it = index_of.find(r.pid);
    if (it == index_of.end()) {
      index_of.emplace(r.pid, ds.samples.size());
      MultiViewSample s;
      s.patient_id = r.pid;
      s.label = r.label;
      s.views.assign(static_cast<size_t>(m), Vec());
      ds.samples.push_back(std::move(s));
      it = index_of.find(r.pid);
    }
    MultiViewSample& s = ds.samples[it->second];
    if (s.label != r.label)
      throw InconsistentRow("read_dataset: patient " + r.pid + " has conflicting labels");
    s.views[static_cast<size_t>(r.view)] = r.features;
  }
  for (const auto& s : ds.samples)
    for (int v = 0; v < m; ++v)
      if (s.views[static_cast<size_t>(v)].empty())
        throw InconsistentRow("read_dataset: patient " + s.patient_id + " is missing view " +
                              std::to_string(v));
  return ds;
}

FoldAssignment kfold_split(const Dataset& ds, int k, std::uint64_t seed, bool stratified) {
  const int n = static_cast<int>(ds.samples.size());
  if (k < 1) throw InvalidConfig("kfold_split: k must be positive");
  if (k > n)
    throw TooManyFolds("kfold_split: k=" + std::to_string(k) + " exceeds " +
                       std::to_string(n) + " patients");

  std::mt19937_64 rng(seed);
  std::vector<int> order = shuffled_indices(n, rng);
  if (stratified) {
    std::vector<int> by_label;
    by_label.reserve(order.size());
    for (int lbl = 0; lbl <= 1; ++lbl)
      for (int idx : order)
        if (ds.samples[static_cast<size_t>(idx)].label == lbl) by_label.push_back(idx);
    order = std::move(by_label);
  }

  FoldAssignment fa;
  fa.k = k;
  fa.fold_by_patient.assign(static_cast<size_t>(n), 0);
  for (int pos = 0; pos < n; ++pos)
    fa.fold_by_patient[static_cast<size_t>(order[static_cast<size_t>(pos)])] = pos % k;
  return fa;
}

void write_fold_assignment(const Dataset& ds, const FoldAssignment& folds,
                           const std::string& path) {
  if (folds.fold_by_patient.size() != ds.samples.size())
    throw DimensionMismatch("write_fold_assignment: assignment does not match dataset");
  std::ofstream out(path);
  if (!out) throw IoError("write_fold_assignment: cannot open '" + path + "'");
  out << "patient_id,fold\n";
  for (size_t i = 0; i < ds.samples.size(); ++i)
    out << ds.samples[i].patient_id << ',' << folds.fold_by_patient[i] << "\n";
}

}  // namespace mmcon
