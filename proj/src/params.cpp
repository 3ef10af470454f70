#include "graphdist/params.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "graphdist/errors.hpp"

namespace graphdist {

Mat& ParameterStore::add(const std::string& name, Mat value) {
  if (name.empty()) throw DataError("ParameterStore: empty parameter name");
  if (index_.count(name)) throw DataError("ParameterStore: duplicate parameter '" + name + "'");
  Entry e;
  e.name = name;
  e.grad = Mat(value.rows, value.cols);
  e.m = Mat(value.rows, value.cols);
  e.v = Mat(value.rows, value.cols);
  e.value = std::move(value);
  entries_.push_back(std::move(e));
  index_[name] = entries_.size() - 1;
  names_.push_back(name);
  return entries_.back().value;
}

std::size_t ParameterStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw DataError("ParameterStore: unknown parameter '" + name + "'");
  return it->second;
}

Mat& ParameterStore::value(const std::string& name) { return entries_[at(name)].value; }
const Mat& ParameterStore::value(const std::string& name) const { return entries_[at(name)].value; }
Mat& ParameterStore::grad(const std::string& name) { return entries_[at(name)].grad; }
const Mat& ParameterStore::grad(const std::string& name) const { return entries_[at(name)].grad; }

void ParameterStore::zero_grad() {
  for (auto& e : entries_) {
    std::fill(e.grad.a.begin(), e.grad.a.end(), 0.0);
  }
}

void ParameterStore::accumulate_grad(const std::string& name, const Mat& g) {
  Mat& dst = grad(name);
  if (!dst.same_shape(g)) {
    throw DataError("accumulate_grad('" + name + "'): shape " + g.shape_str() + " vs " +
                    dst.shape_str());
  }
  for (std::size_t i = 0; i < g.a.size(); ++i) dst.a[i] += g.a[i];
}

void ParameterStore::step(const OptimConfig& config) {
  for (const auto& e : entries_) {
    if (!all_finite(e.grad)) {
      throw NumericError("optimizer step: non-finite gradient in '" + e.name + "'");
    }
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step_));
  for (auto& e : entries_) {
    for (std::size_t i = 0; i < e.value.a.size(); ++i) {
      const double g = e.grad.a[i];
      e.m.a[i] = config.beta1 * e.m.a[i] + (1.0 - config.beta1) * g;
      e.v.a[i] = config.beta2 * e.v.a[i] + (1.0 - config.beta2) * g * g;
      const double mhat = e.m.a[i] / bc1;
      const double vhat = e.v.a[i] / bc2;
      e.value.a[i] -= config.lr * (mhat / (std::sqrt(vhat) + config.eps) +
                                   config.weight_decay * e.value.a[i]);
    }
  }
}

std::size_t ParameterStore::coordinate_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

namespace {

constexpr char kMagic[8] = {'G', 'D', 'C', 'K', 'P', 'T', '0', '1'};

void put_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::ifstream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw DataError("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void put_f64(std::ofstream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

double get_f64(std::ifstream& in) {
  const std::uint64_t bits = get_u64(in);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

void ParameterStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("checkpoint: cannot open '" + path + "' for writing");
  out.write(kMagic, 8);
  put_u64(out, entries_.size());
  for (const auto& e : entries_) {
    put_u64(out, e.name.size());
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put_u64(out, e.value.rows);
    put_u64(out, e.value.cols);
    for (double d : e.value.a) put_f64(out, d);
  }
  if (!out) throw DataError("checkpoint: write failure on '" + path + "'");
}

ParameterStore ParameterStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw DataError("checkpoint: '" + path + "' is not a parameter checkpoint");
  }
  ParameterStore store;
  const std::uint64_t count = get_u64(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t name_len = get_u64(in);
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    if (!in) throw DataError("checkpoint: truncated name in '" + path + "'");
    const std::uint64_t rows = get_u64(in);
    const std::uint64_t cols = get_u64(in);
    Mat m(rows, cols);
    for (double& d : m.a) d = get_f64(in);
    store.add(name, std::move(m));
  }
  return store;
}

Mat xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Mat m(rows, cols);
  for (double& v : m.a) v = rng.uniform(-s, s);
  return m;
}

Tape::NodeId ParamLeaves::at(const std::string& name) const {
  auto it = ids.find(name);
  if (it == ids.end()) throw DataError("ParamLeaves: parameter '" + name + "' not staged");
  return it->second;
}

ParamLeaves stage_parameters(Tape& tape, const ParameterStore& params) {
  ParamLeaves leaves;
  for (const auto& name : params.names()) {
    leaves.ids[name] = tape.leaf(params.value(name));
  }
  return leaves;
}

void accumulate_gradients(const Tape& tape, const ParamLeaves& leaves, ParameterStore& params) {
  for (const auto& name : params.names()) {
    params.accumulate_grad(name, tape.grad(leaves.at(name)));
  }
}

FdCheckResult finite_difference_check(const std::function<double(const ParameterStore&)>& loss_value,
                                      const ParameterStore& params, double eps,
                                      std::size_t max_coords, Rng& rng) {
  const double base = loss_value(params);
  if (!std::isfinite(base)) throw NumericError("finite_difference_check: non-finite loss");

  // Flat list of (parameter, offset) coordinates.
  std::vector<std::pair<std::string, std::size_t>> coords;
  for (const auto& name : params.names()) {
    for (std::size_t i = 0; i < params.value(name).size(); ++i) coords.emplace_back(name, i);
  }
  if (coords.size() > max_coords) {
    rng.shuffle(coords);
    coords.resize(max_coords);
  }

  FdCheckResult result;
  result.coords_checked = coords.size();
  ParameterStore work = params;
  for (const auto& [name, off] : coords) {
    const double saved = work.value(name).a[off];
    work.value(name).a[off] = saved + eps;
    const double up = loss_value(work);
    work.value(name).a[off] = saved - eps;
    const double down = loss_value(work);
    work.value(name).a[off] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_difference_check: non-finite loss at perturbed point");
    }
    const double fd = (up - down) / (2.0 * eps);
    const double an = params.grad(name).a[off];
    const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-6});
    result.max_rel_error = std::max(result.max_rel_error, std::fabs(fd - an) / denom);
  }
  return result;
}

}  // namespace graphdist
