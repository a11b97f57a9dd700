#include "windri/autodiff.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace windri::ad {

std::size_t shape_size(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << 'x';
        os << s[i];
    }
    os << ']';
    return os.str();
}

namespace {

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a) +
                                " vs " + shape_str(b));
}

[[noreturn]] void op_error(const char* op, const std::string& what) {
    throw std::invalid_argument(std::string(op) + ": " + what);
}

}  // namespace

NodeId Tape::push(Node n) {
    n.grad.assign(n.value.size(), 0.0);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

const Node& Tape::at(NodeId id) const {
    if (id >= nodes_.size()) throw std::out_of_range("tape: node id out of range");
    return nodes_[id];
}

double Tape::scalar_value(NodeId id) const {
    const Node& n = at(id);
    if (n.value.size() != 1) op_error("scalar_value", "node is not scalar, shape " + shape_str(n.shape));
    return n.value[0];
}

NodeId Tape::leaf(Shape shape, std::vector<double> value) {
    if (shape_size(shape) != value.size())
        op_error("leaf", "value size " + std::to_string(value.size()) + " does not match shape " +
                             shape_str(shape));
    Node n;
    n.op = Op::kLeaf;
    n.shape = std::move(shape);
    n.value = std::move(value);
    return push(std::move(n));
}

NodeId Tape::scalar(double v) { return leaf({}, {v}); }

NodeId Tape::add(NodeId a, NodeId b) {
    const Node& na = at(a);
    const Node& nb = at(b);
    if (na.shape != nb.shape) shape_error("add", na.shape, nb.shape);
    Node n;
    n.op = Op::kAdd;
    n.shape = na.shape;
    n.parents = {a, b};
    n.value.resize(na.value.size());
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = na.value[i] + nb.value[i];
    return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
    const Node& na = at(a);
    const Node& nb = at(b);
    if (na.shape != nb.shape) shape_error("mul", na.shape, nb.shape);
    Node n;
    n.op = Op::kMul;
    n.shape = na.shape;
    n.parents = {a, b};
    n.value.resize(na.value.size());
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = na.value[i] * nb.value[i];
    return push(std::move(n));
}

NodeId Tape::matvec(NodeId m, NodeId x) {
    const Node& nm = at(m);
    const Node& nx = at(x);
    if (nm.shape.size() != 2 || nx.shape.size() != 1 || nm.shape[1] != nx.shape[0])
        shape_error("matvec", nm.shape, nx.shape);
    const std::size_t rows = nm.shape[0];
    const std::size_t cols = nm.shape[1];
    Node n;
    n.op = Op::kMatVec;
    n.shape = {rows};
    n.parents = {m, x};
    n.value.assign(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += nm.value[r * cols + c] * nx.value[c];
        n.value[r] = acc;
    }
    return push(std::move(n));
}

NodeId Tape::outer(const std::vector<NodeId>& vs) {
    if (vs.empty()) op_error("outer", "needs at least one input");
    Shape out;
    for (NodeId v : vs) {
        const Node& nv = at(v);
        if (nv.shape.size() != 1) op_error("outer", "input is not a vector, shape " + shape_str(nv.shape));
        out.push_back(nv.shape[0]);
    }
    Node n;
    n.op = Op::kOuter;
    n.shape = out;
    n.parents = vs;
    n.value.assign(shape_size(out), 0.0);
    const std::size_t total = n.value.size();
    std::vector<std::size_t> mi(vs.size(), 0);
    for (std::size_t lin = 0; lin < total; ++lin) {
        double prod = 1.0;
        for (std::size_t k = 0; k < vs.size(); ++k) prod *= at(vs[k]).value[mi[k]];
        n.value[lin] = prod;
        for (std::size_t k = vs.size(); k-- > 0;) {
            if (++mi[k] < out[k]) break;
            mi[k] = 0;
        }
    }
    return push(std::move(n));
}

NodeId Tape::flatten(NodeId a) {
    const Node& na = at(a);
    Node n;
    n.op = Op::kFlatten;
    n.shape = {na.value.size()};
    n.parents = {a};
    n.value = na.value;
    return push(std::move(n));
}

NodeId Tape::dot(NodeId a, NodeId b) {
    const Node& na = at(a);
    const Node& nb = at(b);
    if (na.shape.size() != 1 || nb.shape.size() != 1 || na.shape != nb.shape)
        shape_error("dot", na.shape, nb.shape);
    double acc = 0.0;
    for (std::size_t i = 0; i < na.value.size(); ++i) acc += na.value[i] * nb.value[i];
    Node n;
    n.op = Op::kDot;
    n.shape = {};
    n.parents = {a, b};
    n.value = {acc};
    return push(std::move(n));
}

NodeId Tape::sigmoid(NodeId a) {
    const Node& na = at(a);
    Node n;
    n.op = Op::kSigmoid;
    n.shape = na.shape;
    n.parents = {a};
    n.value.resize(na.value.size());
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = 1.0 / (1.0 + std::exp(-na.value[i]));
    return push(std::move(n));
}

NodeId Tape::relu(NodeId a) {
    const Node& na = at(a);
    Node n;
    n.op = Op::kRelu;
    n.shape = na.shape;
    n.parents = {a};
    n.value.resize(na.value.size());
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = na.value[i] > 0.0 ? na.value[i] : 0.0;
    return push(std::move(n));
}

NodeId Tape::concat(const std::vector<NodeId>& vs) {
    if (vs.empty()) op_error("concat", "needs at least one input");
    Node n;
    n.op = Op::kConcat;
    n.parents = vs;
    for (NodeId v : vs) {
        const Node& nv = at(v);
        n.value.insert(n.value.end(), nv.value.begin(), nv.value.end());
    }
    n.shape = {n.value.size()};
    return push(std::move(n));
}

NodeId Tape::row_select(NodeId table, std::size_t row) {
    const Node& nt = at(table);
    if (nt.shape.size() != 2) op_error("row_select", "input is not a matrix, shape " + shape_str(nt.shape));
    if (row >= nt.shape[0])
        op_error("row_select", "row " + std::to_string(row) + " out of range for shape " + shape_str(nt.shape));
    const std::size_t cols = nt.shape[1];
    Node n;
    n.op = Op::kRowSelect;
    n.shape = {cols};
    n.parents = {table};
    n.aux = row;
    n.value.assign(nt.value.begin() + static_cast<std::ptrdiff_t>(row * cols),
                   nt.value.begin() + static_cast<std::ptrdiff_t>((row + 1) * cols));
    return push(std::move(n));
}

NodeId Tape::mse_loss(NodeId pred, NodeId target) {
    const Node& np = at(pred);
    const Node& nt = at(target);
    if (np.shape != nt.shape) shape_error("mse_loss", np.shape, nt.shape);
    if (np.value.empty()) op_error("mse_loss", "empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < np.value.size(); ++i) {
        const double d = np.value[i] - nt.value[i];
        acc += d * d;
    }
    Node n;
    n.op = Op::kMseLoss;
    n.shape = {};
    n.parents = {pred, target};
    n.value = {acc / static_cast<double>(np.value.size())};
    return push(std::move(n));
}

void Tape::backward(NodeId loss) {
    const Node& ln = at(loss);
    if (ln.value.size() != 1)
        op_error("backward", "loss is not scalar, shape " + shape_str(ln.shape));
    for (Node& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
    nodes_[loss].grad[0] = 1.0;

    for (NodeId id = loss + 1; id-- > 0;) {
        Node& n = nodes_[id];
        switch (n.op) {
            case Op::kLeaf:
                break;
            case Op::kAdd: {
                Node& a = nodes_[n.parents[0]];
                Node& b = nodes_[n.parents[1]];
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    a.grad[i] += n.grad[i];
                    b.grad[i] += n.grad[i];
                }
                break;
            }
            case Op::kMul: {
                Node& a = nodes_[n.parents[0]];
                Node& b = nodes_[n.parents[1]];
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    a.grad[i] += n.grad[i] * b.value[i];
                    b.grad[i] += n.grad[i] * a.value[i];
                }
                break;
            }
            case Op::kMatVec: {
                Node& m = nodes_[n.parents[0]];
                Node& x = nodes_[n.parents[1]];
                const std::size_t rows = m.shape[0];
                const std::size_t cols = m.shape[1];
                for (std::size_t r = 0; r < rows; ++r) {
                    const double g = n.grad[r];
                    for (std::size_t c = 0; c < cols; ++c) {
                        m.grad[r * cols + c] += g * x.value[c];
                        x.grad[c] += g * m.value[r * cols + c];
                    }
                }
                break;
            }
            case Op::kOuter: {
                const std::size_t k = n.parents.size();
                std::vector<std::size_t> mi(k, 0);
                std::vector<double> factors(k), prefix(k), suffix(k);
                for (std::size_t lin = 0; lin < n.grad.size(); ++lin) {
                    for (std::size_t d = 0; d < k; ++d) factors[d] = nodes_[n.parents[d]].value[mi[d]];
                    double acc = 1.0;
                    for (std::size_t d = 0; d < k; ++d) {
                        prefix[d] = acc;
                        acc *= factors[d];
                    }
                    acc = 1.0;
                    for (std::size_t d = k; d-- > 0;) {
                        suffix[d] = acc;
                        acc *= factors[d];
                    }
                    const double g = n.grad[lin];
                    for (std::size_t d = 0; d < k; ++d)
                        nodes_[n.parents[d]].grad[mi[d]] += g * prefix[d] * suffix[d];
                    for (std::size_t d = k; d-- > 0;) {
                        if (++mi[d] < n.shape[d]) break;
                        mi[d] = 0;
                    }
                }
                break;
            }
            case Op::kFlatten: {
                Node& a = nodes_[n.parents[0]];
                for (std::size_t i = 0; i < n.grad.size(); ++i) a.grad[i] += n.grad[i];
                break;
            }
            case Op::kDot: {
                Node& a = nodes_[n.parents[0]];
                Node& b = nodes_[n.parents[1]];
                const double g = n.grad[0];
                for (std::size_t i = 0; i < a.grad.size(); ++i) {
                    a.grad[i] += g * b.value[i];
                    b.grad[i] += g * a.value[i];
                }
                break;
            }
            case Op::kSigmoid: {
                Node& a = nodes_[n.parents[0]];
                for (std::size_t i = 0; i < n.grad.size(); ++i)
                    a.grad[i] += n.grad[i] * n.value[i] * (1.0 - n.value[i]);
                break;
            }
            case Op::kRelu: {
                Node& a = nodes_[n.parents[0]];
                for (std::size_t i = 0; i < n.grad.size(); ++i)
                    a.grad[i] += a.value[i] > 0.0 ? n.grad[i] : 0.0;
                break;
            }
            case Op::kConcat: {
                std::size_t off = 0;
                for (NodeId p : n.parents) {
                    Node& a = nodes_[p];
                    for (std::size_t i = 0; i < a.grad.size(); ++i) a.grad[i] += n.grad[off + i];
                    off += a.grad.size();
                }
                break;
            }
            case Op::kRowSelect: {
                Node& t = nodes_[n.parents[0]];
                const std::size_t cols = n.shape[0];
                for (std::size_t c = 0; c < cols; ++c) t.grad[n.aux * cols + c] += n.grad[c];
                break;
            }
            case Op::kMseLoss: {
                Node& p = nodes_[n.parents[0]];
                Node& t = nodes_[n.parents[1]];
                const double g = n.grad[0] * 2.0 / static_cast<double>(p.value.size());
                for (std::size_t i = 0; i < p.grad.size(); ++i) {
                    const double d = p.value[i] - t.value[i];
                    p.grad[i] += g * d;
                    t.grad[i] -= g * d;
                }
                break;
            }
        }
    }
}

double grad_check(const GraphBuilder& build,
                  const std::vector<Shape>& leaf_shapes,
                  std::vector<std::vector<double>> leaf_values,
                  double step) {
    if (step <= 0.0) throw std::invalid_argument("grad_check: step must be positive");
    if (leaf_shapes.size() != leaf_values.size())
        throw std::invalid_argument("grad_check: shapes and values differ in count");

    auto eval = [&](const std::vector<std::vector<double>>& values) {
        Tape t;
        std::vector<NodeId> leaves;
        leaves.reserve(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) leaves.push_back(t.leaf(leaf_shapes[i], values[i]));
        const NodeId loss = build(t, leaves);
        return t.scalar_value(loss);
    };

    // Analytic pass.
    Tape t;
    std::vector<NodeId> leaves;
    leaves.reserve(leaf_values.size());
    for (std::size_t i = 0; i < leaf_values.size(); ++i) leaves.push_back(t.leaf(leaf_shapes[i], leaf_values[i]));
    const NodeId loss = build(t, leaves);
    t.backward(loss);

    double max_rel = 0.0;
    for (std::size_t li = 0; li < leaf_values.size(); ++li) {
        for (std::size_t c = 0; c < leaf_values[li].size(); ++c) {
            const double keep = leaf_values[li][c];
            leaf_values[li][c] = keep + step;
            const double hi = eval(leaf_values);
            leaf_values[li][c] = keep - step;
            const double lo = eval(leaf_values);
            leaf_values[li][c] = keep;
            const double numeric = (hi - lo) / (2.0 * step);
            const double analytic = t.grad(leaves[li])[c];
            const double denom = std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
            max_rel = std::max(max_rel, std::fabs(analytic - numeric) / denom);
        }
    }
    return max_rel;
}

}  // namespace windri::ad
