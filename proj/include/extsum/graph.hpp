#ifndef EXTSUM_GRAPH_HPP
#define EXTSUM_GRAPH_HPP

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace extsum {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct Param {
  std::string name;
  Mat value;
  // Accumulator written by Graph::Backward.
  mutable Mat grad;
};

// Named parameter tensors in insertion order. Addresses are stable.
class ParameterStore {
 public:
  Param& Add(const std::string& name, Eigen::Index rows, Eigen::Index cols);
  Param& Get(const std::string& name);
  const Param& Get(const std::string& name) const;
  bool Contains(const std::string& name) const { return index_.count(name) > 0; }

  void ZeroGrad();
  std::size_t ScalarCount() const;
  double GradNorm() const;

  std::vector<std::unique_ptr<Param>>& all() { return params_; }
  const std::vector<std::unique_ptr<Param>>& all() const { return params_; }

 private:
  std::vector<std::unique_ptr<Param>> params_;
  std::map<std::string, std::size_t> index_;
};

struct Expr {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// A define-by-run computation graph. Every op computes its value eagerly;
// Backward() replays the recorded adjoints in reverse creation order and
// accumulates parameter gradients into Param::grad.
class Graph {
 public:
  // With record_gradients == false no adjoints are stored (inference).
  explicit Graph(bool record_gradients = true);

  const Mat& value(Expr e) const;
  double scalar(Expr e) const { return value(e)(0, 0); }
  std::size_t size() const { return nodes_.size(); }

  void Backward(Expr loss);

  // Leaves.
  Expr Constant(Mat value);
  Expr Parameter(const Param& p);
  // Column `index` of p as a vector.
  Expr Lookup(const Param& p, int index);

  // Elementwise and shape ops.
  Expr Add(Expr a, Expr b);
  Expr Sub(Expr a, Expr b);
  Expr CMul(Expr a, Expr b);
  Expr Scale(Expr a, double c);
  // s (1x1) times every element of a.
  Expr ScaleBy(Expr s, Expr a);
  Expr OneMinus(Expr a);
  Expr Tanh(Expr a);
  Expr Sigmoid(Expr a);
  Expr Sum(Expr a);
  Expr MatMul(Expr a, Expr b);
  // a^T * b
  Expr MatMulTN(Expr a, Expr b);
  Expr Transpose(Expr a);
  // m + b for every column of m; b is a column vector.
  Expr AddBiasCols(Expr m, Expr b);
  Expr ConcatRows(std::span<const Expr> parts);
  Expr ConcatCols(std::span<const Expr> parts);
  Expr Col(Expr m, Eigen::Index j);
  Expr Rows(Expr m, Eigen::Index start, Eigen::Index count);
  // Column mean over [start, start + count).
  Expr MeanCols(Expr m, Eigen::Index start, Eigen::Index count);
  // out[i] = v[index[i]]
  Expr Gather(Expr v, std::span<const int> index);
  // out[index[i]] += v[i], out has `size` rows.
  Expr ScatterAdd(Expr v, std::span<const int> index, Eigen::Index size);
  Expr Pick(Expr v, Eigen::Index i);

  // Normalisations.
  Expr Softmax(Expr v);
  Expr SoftmaxCols(Expr m);

  // Fused domain ops.
  Expr FuseAttention(Expr word_attention, Expr sentence_scores,
                     std::span<const int> sentence_map);
  Expr BinaryCrossEntropy(Expr scores, std::span<const int> labels);
  // log(max(p, floor)); zero gradient below the floor.
  Expr LogFloor(Expr p, double floor);
  // GRU cell. input_proj = W x + b_x (3H), recurrent = U (3H x H),
  // recurrent_bias = b_h (3H). Gate order: reset, update, candidate.
  Expr Gru(Expr input_proj, Expr h, Expr recurrent, Expr recurrent_bias);

 private:
  struct Node {
    Mat value;
    const Mat* alias = nullptr;
    const Param* param = nullptr;
    Mat grad;
    std::function<void(Graph&, const Mat&)> backward;
  };

  Expr Push(Mat value, std::function<void(Graph&, const Mat&)> backward);
  void Accumulate(int id, const Mat& delta);
  template <typename Fn>
  void AccumulateWith(int id, Eigen::Index rows, Eigen::Index cols, Fn&& fn);

  bool record_;
  std::vector<Node> nodes_;
};

}  // namespace extsum

#endif  // EXTSUM_GRAPH_HPP
