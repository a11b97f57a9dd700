#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace windri::ad {

using NodeId = std::size_t;

// Dense array shape. {} is a scalar, {n} a vector, {r,c} a matrix, and so on.
using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& s);
std::string shape_str(const Shape& s);

enum class Op {
    kLeaf,
    kAdd,
    kMul,        // elementwise
    kMatVec,
    kOuter,      // n-ary outer product of vectors
    kFlatten,
    kDot,
    kSigmoid,
    kRelu,
    kConcat,
    kRowSelect,  // one row of a matrix
    kMseLoss,
};

struct Node {
    Op op = Op::kLeaf;
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<NodeId> parents;
    std::size_t aux = 0;  // kRowSelect: selected row
};

// Record-on-forward, replay-backward tape. Nodes are stored in construction
// order, which is a topological order of the graph; backward() walks the tape
// once in reverse. No broadcasting: shapes must match exactly and mismatches
// throw std::invalid_argument naming the op and both shapes.
class Tape {
public:
    NodeId leaf(Shape shape, std::vector<double> value);
    NodeId scalar(double v);

    NodeId add(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId matvec(NodeId m, NodeId x);
    NodeId outer(const std::vector<NodeId>& vs);
    NodeId flatten(NodeId a);
    NodeId dot(NodeId a, NodeId b);
    NodeId sigmoid(NodeId a);
    NodeId relu(NodeId a);
    NodeId concat(const std::vector<NodeId>& vs);
    NodeId row_select(NodeId table, std::size_t row);
    NodeId mse_loss(NodeId pred, NodeId target);

    // Seeds d(loss)/d(loss) = 1 and accumulates exact analytic partials into
    // every ancestor, visiting each tape node exactly once.
    void backward(NodeId loss);

    const Node& node(NodeId id) const { return nodes_[id]; }
    const std::vector<double>& value(NodeId id) const { return nodes_[id].value; }
    const std::vector<double>& grad(NodeId id) const { return nodes_[id].grad; }
    double scalar_value(NodeId id) const;
    std::size_t size() const { return nodes_.size(); }

private:
    NodeId push(Node n);
    const Node& at(NodeId id) const;

    std::vector<Node> nodes_;
};

// Builds a scalar graph from the given leaves; returns the loss node.
using GraphBuilder = std::function<NodeId(Tape&, const std::vector<NodeId>&)>;

// Central-difference check of the tape gradients, coordinate by coordinate.
// Returns max over coordinates of |analytic - numeric| / max(1, |analytic|, |numeric|).
double grad_check(const GraphBuilder& build,
                  const std::vector<Shape>& leaf_shapes,
                  std::vector<std::vector<double>> leaf_values,
                  double step = 1e-5);

}  // namespace windri::ad
