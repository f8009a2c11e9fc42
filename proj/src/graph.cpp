#include "extsum/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "extsum/fusion.hpp"

namespace extsum {

// ---- ParameterStore ------------------------------------------------------------

Param& ParameterStore::Add(const std::string& name, Eigen::Index rows,
                           Eigen::Index cols) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter " + name);
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value = Mat::Zero(rows, cols);
  p->grad = Mat::Zero(rows, cols);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Param& ParameterStore::Get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
  return *params_[it->second];
}

const Param& ParameterStore::Get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
  return *params_[it->second];
}

void ParameterStore::ZeroGrad() {
  for (auto& p : params_) p->grad.setZero(p->value.rows(), p->value.cols());
}

std::size_t ParameterStore::ScalarCount() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

double ParameterStore::GradNorm() const {
  double s = 0.0;
  for (const auto& p : params_) s += p->grad.squaredNorm();
  return std::sqrt(s);
}

// ---- Graph ---------------------------------------------------------------------------

Graph::Graph(bool record_gradients) : record_(record_gradients) {
  nodes_.reserve(1024);
}

const Mat& Graph::value(Expr e) const {
  const Node& n = nodes_.at(static_cast<std::size_t>(e.id));
  return n.alias ? *n.alias : n.value;
}

Expr Graph::Push(Mat value, std::function<void(Graph&, const Mat&)> backward) {
  Node n;
  n.value = std::move(value);
  if (record_) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Expr{static_cast<int>(nodes_.size()) - 1};
}

template <typename Fn>
void Graph::AccumulateWith(int id, Eigen::Index rows, Eigen::Index cols, Fn&& fn) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.param) {
    fn(n.param->grad);
    return;
  }
  if (n.grad.size() == 0) n.grad = Mat::Zero(rows, cols);
  fn(n.grad);
}

void Graph::Accumulate(int id, const Mat& delta) {
  AccumulateWith(id, delta.rows(), delta.cols(), [&](Mat& g) { g += delta; });
}

void Graph::Backward(Expr loss) {
  if (!record_) throw std::logic_error("graph was built without gradient recording");
  const Mat& v = value(loss);
  if (v.size() != 1) throw std::invalid_argument("Backward needs a scalar");
  Accumulate(loss.id, Mat::Ones(1, 1));
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.backward || n.grad.size() == 0) continue;
    n.backward(*this, n.grad);
  }
}

Expr Graph::Constant(Mat value) { return Push(std::move(value), nullptr); }

Expr Graph::Parameter(const Param& p) {
  Node n;
  n.alias = &p.value;
  n.param = record_ ? &p : nullptr;
  nodes_.push_back(std::move(n));
  return Expr{static_cast<int>(nodes_.size()) - 1};
}

Expr Graph::Lookup(const Param& p, int index) {
  if (index < 0 || index >= p.value.cols()) {
    throw std::out_of_range("lookup index " + std::to_string(index) + " out of range for " +
                            p.name);
  }
  const Param* param = &p;
  return Push(p.value.col(index), [param, index](Graph&, const Mat& g) {
    param->grad.col(index) += g;
  });
}

namespace {

void RequireSameShape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
  }
}

}  // namespace

Expr Graph::Add(Expr a, Expr b) {
  RequireSameShape(value(a), value(b), "Add");
  return Push(value(a) + value(b), [a, b](Graph& g, const Mat& d) {
    g.Accumulate(a.id, d);
    g.Accumulate(b.id, d);
  });
}

Expr Graph::Sub(Expr a, Expr b) {
  RequireSameShape(value(a), value(b), "Sub");
  return Push(value(a) - value(b), [a, b](Graph& g, const Mat& d) {
    g.Accumulate(a.id, d);
    g.Accumulate(b.id, -d);
  });
}

Expr Graph::CMul(Expr a, Expr b) {
  RequireSameShape(value(a), value(b), "CMul");
  return Push(value(a).cwiseProduct(value(b)), [a, b](Graph& g, const Mat& d) {
    g.Accumulate(a.id, d.cwiseProduct(g.value(b)));
    g.Accumulate(b.id, d.cwiseProduct(g.value(a)));
  });
}

Expr Graph::Scale(Expr a, double c) {
  return Push(value(a) * c, [a, c](Graph& g, const Mat& d) { g.Accumulate(a.id, d * c); });
}

Expr Graph::ScaleBy(Expr s, Expr a) {
  if (value(s).size() != 1) throw std::invalid_argument("ScaleBy: scale is not 1x1");
  return Push(value(a) * value(s)(0, 0), [s, a](Graph& g, const Mat& d) {
    g.Accumulate(a.id, d * g.value(s)(0, 0));
    g.Accumulate(s.id, Mat::Constant(1, 1, d.cwiseProduct(g.value(a)).sum()));
  });
}

Expr Graph::OneMinus(Expr a) {
  return Push((1.0 - value(a).array()).matrix(),
              [a](Graph& g, const Mat& d) { g.Accumulate(a.id, -d); });
}

Expr Graph::Tanh(Expr a) {
  Mat y = value(a).array().tanh().matrix();
  const int self = static_cast<int>(nodes_.size());
  return Push(std::move(y), [a, self](Graph& g, const Mat& d) {
    const Mat& y = g.nodes_[self].value;
    g.Accumulate(a.id, (d.array() * (1.0 - y.array().square())).matrix());
  });
}

Expr Graph::Sigmoid(Expr a) {
  Mat y = (1.0 / (1.0 + (-value(a).array()).exp())).matrix();
  const int self = static_cast<int>(nodes_.size());
  return Push(std::move(y), [a, self](Graph& g, const Mat& d) {
    const Mat& y = g.nodes_[self].value;
    g.Accumulate(a.id, (d.array() * y.array() * (1.0 - y.array())).matrix());
  });
}

Expr Graph::Sum(Expr a) {
  const auto rows = value(a).rows(), cols = value(a).cols();
  return Push(Mat::Constant(1, 1, value(a).sum()), [a, rows, cols](Graph& g, const Mat& d) {
    g.Accumulate(a.id, Mat::Constant(rows, cols, d(0, 0)));
  });
}

Expr Graph::MatMul(Expr a, Expr b) {
  if (value(a).cols() != value(b).rows()) {
    throw std::invalid_argument("MatMul: inner dimensions differ");
  }
  return Push(value(a) * value(b), [a, b](Graph& g, const Mat& d) {
    const Mat& av = g.value(a);
    const Mat& bv = g.value(b);
    g.AccumulateWith(a.id, av.rows(), av.cols(),
                     [&](Mat& ga) { ga.noalias() += d * bv.transpose(); });
    g.AccumulateWith(b.id, bv.rows(), bv.cols(),
                     [&](Mat& gb) { gb.noalias() += av.transpose() * d; });
  });
}

Expr Graph::MatMulTN(Expr a, Expr b) {
  if (value(a).rows() != value(b).rows()) {
    throw std::invalid_argument("MatMulTN: row counts differ");
  }
  return Push(value(a).transpose() * value(b), [a, b](Graph& g, const Mat& d) {
    const Mat& av = g.value(a);
    const Mat& bv = g.value(b);
    g.AccumulateWith(a.id, av.rows(), av.cols(),
                     [&](Mat& ga) { ga.noalias() += bv * d.transpose(); });
    g.AccumulateWith(b.id, bv.rows(), bv.cols(),
                     [&](Mat& gb) { gb.noalias() += av * d; });
  });
}

Expr Graph::Transpose(Expr a) {
  return Push(value(a).transpose(),
              [a](Graph& g, const Mat& d) { g.Accumulate(a.id, d.transpose()); });
}

Expr Graph::AddBiasCols(Expr m, Expr b) {
  if (value(b).cols() != 1 || value(b).rows() != value(m).rows()) {
    throw std::invalid_argument("AddBiasCols: bias shape mismatch");
  }
  Mat y = value(m);
  y.colwise() += value(b).col(0);
  return Push(std::move(y), [m, b](Graph& g, const Mat& d) {
    g.Accumulate(m.id, d);
    g.Accumulate(b.id, d.rowwise().sum());
  });
}

Expr Graph::ConcatRows(std::span<const Expr> parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatRows: nothing to concatenate");
  Eigen::Index rows = 0;
  const Eigen::Index cols = value(parts[0]).cols();
  for (Expr p : parts) {
    if (value(p).cols() != cols) throw std::invalid_argument("ConcatRows: column mismatch");
    rows += value(p).rows();
  }
  Mat y(rows, cols);
  Eigen::Index r = 0;
  for (Expr p : parts) {
    y.middleRows(r, value(p).rows()) = value(p);
    r += value(p).rows();
  }
  std::vector<Expr> ps(parts.begin(), parts.end());
  return Push(std::move(y), [ps](Graph& g, const Mat& d) {
    Eigen::Index r = 0;
    for (Expr p : ps) {
      const auto n = g.value(p).rows();
      g.Accumulate(p.id, d.middleRows(r, n));
      r += n;
    }
  });
}

Expr Graph::ConcatCols(std::span<const Expr> parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatCols: nothing to concatenate");
  Eigen::Index cols = 0;
  const Eigen::Index rows = value(parts[0]).rows();
  for (Expr p : parts) {
    if (value(p).rows() != rows) throw std::invalid_argument("ConcatCols: row mismatch");
    cols += value(p).cols();
  }
  Mat y(rows, cols);
  Eigen::Index c = 0;
  for (Expr p : parts) {
    y.middleCols(c, value(p).cols()) = value(p);
    c += value(p).cols();
  }
  std::vector<Expr> ps(parts.begin(), parts.end());
  return Push(std::move(y), [ps](Graph& g, const Mat& d) {
    Eigen::Index c = 0;
    for (Expr p : ps) {
      const auto n = g.value(p).cols();
      g.Accumulate(p.id, d.middleCols(c, n));
      c += n;
    }
  });
}

Expr Graph::Col(Expr m, Eigen::Index j) {
  const Mat& v = value(m);
  if (j < 0 || j >= v.cols()) throw std::out_of_range("Col: index out of range");
  const auto rows = v.rows(), cols = v.cols();
  return Push(v.col(j), [m, j, rows, cols](Graph& g, const Mat& d) {
    g.AccumulateWith(m.id, rows, cols, [&](Mat& gm) { gm.col(j) += d; });
  });
}

Expr Graph::Rows(Expr m, Eigen::Index start, Eigen::Index count) {
  const Mat& v = value(m);
  if (start < 0 || start + count > v.rows()) throw std::out_of_range("Rows: out of range");
  const auto rows = v.rows(), cols = v.cols();
  return Push(v.middleRows(start, count), [m, start, count, rows, cols](Graph& g, const Mat& d) {
    g.AccumulateWith(m.id, rows, cols, [&](Mat& gm) { gm.middleRows(start, count) += d; });
  });
}

Expr Graph::MeanCols(Expr m, Eigen::Index start, Eigen::Index count) {
  const Mat& v = value(m);
  if (count < 1 || start < 0 || start + count > v.cols()) {
    throw std::out_of_range("MeanCols: out of range");
  }
  const auto rows = v.rows(), cols = v.cols();
  Mat y = v.middleCols(start, count).rowwise().mean();
  return Push(std::move(y), [m, start, count, rows, cols](Graph& g, const Mat& d) {
    g.AccumulateWith(m.id, rows, cols, [&](Mat& gm) {
      gm.middleCols(start, count).colwise() += d.col(0) / static_cast<double>(count);
    });
  });
}

Expr Graph::Gather(Expr v, std::span<const int> index) {
  const Mat& x = value(v);
  if (x.cols() != 1) throw std::invalid_argument("Gather: expects a column vector");
  Mat y(static_cast<Eigen::Index>(index.size()), 1);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= x.rows()) throw std::out_of_range("Gather: index");
    y(static_cast<Eigen::Index>(i), 0) = x(index[i], 0);
  }
  std::vector<int> idx(index.begin(), index.end());
  const auto rows = x.rows();
  return Push(std::move(y), [v, idx, rows](Graph& g, const Mat& d) {
    g.AccumulateWith(v.id, rows, 1, [&](Mat& gv) {
      for (std::size_t i = 0; i < idx.size(); ++i) gv(idx[i], 0) += d(static_cast<Eigen::Index>(i), 0);
    });
  });
}

Expr Graph::ScatterAdd(Expr v, std::span<const int> index, Eigen::Index size) {
  const Mat& x = value(v);
  if (x.cols() != 1 || x.rows() != static_cast<Eigen::Index>(index.size())) {
    throw std::invalid_argument("ScatterAdd: shape mismatch");
  }
  Mat y = Mat::Zero(size, 1);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= size) throw std::out_of_range("ScatterAdd: index");
    y(index[i], 0) += x(static_cast<Eigen::Index>(i), 0);
  }
  std::vector<int> idx(index.begin(), index.end());
  return Push(std::move(y), [v, idx](Graph& g, const Mat& d) {
    Mat gv(static_cast<Eigen::Index>(idx.size()), 1);
    for (std::size_t i = 0; i < idx.size(); ++i) gv(static_cast<Eigen::Index>(i), 0) = d(idx[i], 0);
    g.Accumulate(v.id, gv);
  });
}

Expr Graph::Pick(Expr v, Eigen::Index i) {
  const Mat& x = value(v);
  if (x.cols() != 1 || i < 0 || i >= x.rows()) throw std::out_of_range("Pick: index");
  const auto rows = x.rows();
  return Push(Mat::Constant(1, 1, x(i, 0)), [v, i, rows](Graph& g, const Mat& d) {
    g.AccumulateWith(v.id, rows, 1, [&](Mat& gv) { gv(i, 0) += d(0, 0); });
  });
}

Expr Graph::Softmax(Expr v) {
  const Mat& x = value(v);
  Mat y = (x.array() - x.maxCoeff()).exp().matrix();
  y /= y.sum();
  const int self = static_cast<int>(nodes_.size());
  return Push(std::move(y), [v, self](Graph& g, const Mat& d) {
    const Mat& y = g.nodes_[self].value;
    const double dot = d.cwiseProduct(y).sum();
    g.Accumulate(v.id, (y.array() * (d.array() - dot)).matrix());
  });
}

Expr Graph::SoftmaxCols(Expr m) {
  const Mat& x = value(m);
  Mat y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    y.col(c) = (x.col(c).array() - x.col(c).maxCoeff()).exp().matrix();
    y.col(c) /= y.col(c).sum();
  }
  const int self = static_cast<int>(nodes_.size());
  return Push(std::move(y), [m, self](Graph& g, const Mat& d) {
    const Mat& y = g.nodes_[self].value;
    Mat gx(y.rows(), y.cols());
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
      const double dot = d.col(c).dot(y.col(c));
      gx.col(c) = (y.col(c).array() * (d.col(c).array() - dot)).matrix();
    }
    g.Accumulate(m.id, gx);
  });
}

Expr Graph::FuseAttention(Expr word_attention, Expr sentence_scores,
                          std::span<const int> sentence_map) {
  const Vec alpha = value(word_attention).col(0);
  const Vec beta = value(sentence_scores).col(0);
  Vec fused = extsum::FuseAttention(alpha, beta, sentence_map);
  double z = 0.0;
  for (Eigen::Index m = 0; m < alpha.size(); ++m) z += alpha[m] * beta[sentence_map[m]];
  std::vector<int> map(sentence_map.begin(), sentence_map.end());
  const int self = static_cast<int>(nodes_.size());
  return Push(std::move(fused), [word_attention, sentence_scores, map, z, self](
                                    Graph& g, const Mat& d) {
    if (z < kFusionEpsilon) {
      g.Accumulate(word_attention.id, d);
      return;
    }
    const Mat& y = g.nodes_[self].value;
    const Mat& a = g.value(word_attention);
    const Mat& b = g.value(sentence_scores);
    const double dot = d.cwiseProduct(y).sum();
    Mat ga(a.rows(), 1);
    Mat gb = Mat::Zero(b.rows(), 1);
    for (Eigen::Index m = 0; m < a.rows(); ++m) {
      const double du = (d(m, 0) - dot) / z;
      ga(m, 0) = du * b(map[m], 0);
      gb(map[m], 0) += du * a(m, 0);
    }
    g.Accumulate(word_attention.id, ga);
    g.Accumulate(sentence_scores.id, gb);
  });
}

Expr Graph::BinaryCrossEntropy(Expr scores, std::span<const int> labels) {
  const Mat& b = value(scores);
  std::vector<double> s(b.data(), b.data() + b.size());
  const double loss = LossExt(s, labels);
  std::vector<int> g_labels(labels.begin(), labels.end());
  return Push(Mat::Constant(1, 1, loss), [scores, g_labels](Graph& g, const Mat& d) {
    const Mat& b = g.value(scores);
    const double n = static_cast<double>(b.size());
    Mat gb(b.rows(), b.cols());
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      const double x = b(i);
      if (x < kScoreClip || x > 1.0 - kScoreClip) {
        gb(i) = 0.0;
      } else {
        gb(i) = (g_labels[static_cast<std::size_t>(i)] ? -1.0 / x : 1.0 / (1.0 - x)) / n;
      }
    }
    g.Accumulate(scores.id, gb * d(0, 0));
  });
}

Expr Graph::LogFloor(Expr p, double floor) {
  const Mat& x = value(p);
  Mat y = x.cwiseMax(floor).array().log().matrix();
  return Push(std::move(y), [p, floor](Graph& g, const Mat& d) {
    const Mat& x = g.value(p);
    Mat gx(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) gx(i) = x(i) > floor ? d(i) / x(i) : 0.0;
    g.Accumulate(p.id, gx);
  });
}

Expr Graph::Gru(Expr input_proj, Expr h, Expr recurrent, Expr recurrent_bias) {
  const Mat& wx = value(input_proj);
  const Mat& hp = value(h);
  const Mat& u = value(recurrent);
  const Mat& bh = value(recurrent_bias);
  const Eigen::Index H = hp.rows();
  if (wx.rows() != 3 * H || u.rows() != 3 * H || u.cols() != H || bh.rows() != 3 * H) {
    throw std::invalid_argument("Gru: dimension mismatch");
  }
  const Vec a = u * hp.col(0) + bh.col(0);
  const Vec r = (1.0 / (1.0 + (-(wx.col(0).head(H) + a.head(H))).array().exp())).matrix();
  const Vec z =
      (1.0 / (1.0 + (-(wx.col(0).segment(H, H) + a.segment(H, H))).array().exp())).matrix();
  const Vec n = (wx.col(0).tail(H) + r.cwiseProduct(a.tail(H))).array().tanh().matrix();
  Mat out = ((1.0 - z.array()) * n.array() + z.array() * hp.col(0).array()).matrix();
  return Push(std::move(out), [input_proj, h, recurrent, recurrent_bias, a, r, z, n, H](
                                  Graph& g, const Mat& d) {
    const Vec dh = d.col(0);
    const Vec& hprev = g.value(h).col(0);
    const Vec dz = dh.cwiseProduct(hprev - n);
    const Vec dn = dh.cwiseProduct((1.0 - z.array()).matrix());
    const Vec dn_pre = dn.cwiseProduct((1.0 - n.array().square()).matrix());
    const Vec dr = dn_pre.cwiseProduct(a.tail(H));
    const Vec dz_pre = dz.cwiseProduct((z.array() * (1.0 - z.array())).matrix());
    const Vec dr_pre = dr.cwiseProduct((r.array() * (1.0 - r.array())).matrix());
    Vec dwx(3 * H);
    dwx << dr_pre, dz_pre, dn_pre;
    Vec da(3 * H);
    da << dr_pre, dz_pre, dn_pre.cwiseProduct(r);
    g.Accumulate(input_proj.id, dwx);
    g.Accumulate(recurrent_bias.id, da);
    const Mat& u = g.value(recurrent);
    g.AccumulateWith(recurrent.id, u.rows(), u.cols(),
                     [&](Mat& gu) { gu.noalias() += da * hprev.transpose(); });
    g.Accumulate(h.id, u.transpose() * da + dh.cwiseProduct(z));
  });
}

}  // namespace extsum
