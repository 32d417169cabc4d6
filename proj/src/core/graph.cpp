#include "core/graph.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace attnfc {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

void require_finite(const Tensor& t, const char* op) {
  if (!t.all_finite()) {
    throw ContractError(std::string(op) + ": non-finite input");
  }
}

}  // namespace

NodeId Graph::push(OpKind op, std::vector<NodeId> inputs, Tensor value, std::size_t axis,
                   double scalar_aux) {
  NodeId id{static_cast<std::uint32_t>(nodes_.size())};
  nodes_.push_back(Node{op, std::move(inputs), std::move(value), Tensor{}, axis, scalar_aux});
  return id;
}

const Graph::Node& Graph::node(NodeId id) const {
  if (!id.valid() || id.index >= nodes_.size()) {
    throw ContractError("graph: invalid node id");
  }
  return nodes_[id.index];
}

const Tensor& Graph::value(NodeId id) const { return node(id).value; }

const Tensor& Graph::grad(NodeId id) const {
  const Node& n = node(id);
  if (!backward_ran_ || n.grad.empty()) {
    throw ContractError("graph: gradient requested before backward()");
  }
  return n.grad;
}

NodeId Graph::leaf(Tensor value) { return push(OpKind::kLeaf, {}, std::move(value)); }

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Tensor& ta = node(a).value;
  const Tensor& tb = node(b).value;
  if (ta.rank() != 2 || (tb.rank() != 2 && tb.rank() != 1)) {
    throw DimensionError("matmul: expected [r×k]·[k×c] or [r×k]·[k], got " + ta.shape_str() +
                         " and " + tb.shape_str());
  }
  std::size_t r = ta.shape()[0];
  std::size_t k = ta.shape()[1];
  if (tb.shape()[0] != k) {
    throw DimensionError("matmul: inner dimensions disagree, " + ta.shape_str() + " vs " +
                         tb.shape_str());
  }
  if (tb.rank() == 1) {
    Tensor out({r});
    for (std::size_t i = 0; i < r; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += ta[i * k + j] * tb[j];
      out[i] = acc;
    }
    return push(OpKind::kMatMul, {a, b}, std::move(out));
  }
  std::size_t c = tb.shape()[1];
  Tensor out({r, c});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double aij = ta[i * k + j];
      if (aij == 0.0) continue;
      for (std::size_t col = 0; col < c; ++col) {
        out[i * c + col] += aij * tb[j * c + col];
      }
    }
  }
  return push(OpKind::kMatMul, {a, b}, std::move(out));
}

NodeId Graph::add(NodeId a, NodeId b) {
  const Tensor& ta = node(a).value;
  const Tensor& tb = node(b).value;
  require_same_shape(ta, tb, "add");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += tb[i];
  return push(OpKind::kAdd, {a, b}, std::move(out));
}

NodeId Graph::sub(NodeId a, NodeId b) {
  const Tensor& ta = node(a).value;
  const Tensor& tb = node(b).value;
  require_same_shape(ta, tb, "sub");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= tb[i];
  return push(OpKind::kSub, {a, b}, std::move(out));
}

NodeId Graph::hadamard(NodeId a, NodeId b) {
  const Tensor& ta = node(a).value;
  const Tensor& tb = node(b).value;
  require_same_shape(ta, tb, "hadamard");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= tb[i];
  return push(OpKind::kHadamard, {a, b}, std::move(out));
}

NodeId Graph::sigmoid(NodeId a) {
  const Tensor& ta = node(a).value;
  require_finite(ta, "sigmoid");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(out[i]);
  return push(OpKind::kSigmoid, {a}, std::move(out));
}

NodeId Graph::tanh_(NodeId a) {
  const Tensor& ta = node(a).value;
  require_finite(ta, "tanh");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  return push(OpKind::kTanh, {a}, std::move(out));
}

NodeId Graph::relu(NodeId a) {
  const Tensor& ta = node(a).value;
  require_finite(ta, "relu");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  return push(OpKind::kRelu, {a}, std::move(out));
}

NodeId Graph::softmax(NodeId a, std::size_t axis) {
  const Tensor& ta = node(a).value;
  if (ta.rank() == 1) {
    if (axis != 0) throw ContractError("softmax: axis out of range for rank-1 tensor");
  } else if (ta.rank() == 2) {
    if (axis > 1) throw ContractError("softmax: axis out of range for rank-2 tensor");
  } else {
    throw ContractError("softmax: rank " + std::to_string(ta.rank()) + " unsupported");
  }
  Tensor out = ta;
  std::size_t nslices, len, stride, base_step;
  if (ta.rank() == 1 || axis == 1) {
    nslices = ta.rank() == 1 ? 1 : ta.shape()[0];  // along rows
    len = ta.rank() == 1 ? ta.shape()[0] : ta.shape()[1];
    stride = 1;
    base_step = len;
  } else {  // axis == 0 on rank 2: down each column
    nslices = ta.shape()[1];
    len = ta.shape()[0];
    stride = ta.shape()[1];
    base_step = 1;
  }
  for (std::size_t s = 0; s < nslices; ++s) {
    std::size_t base = s * base_step;
    double mx = out[base];
    for (std::size_t i = 1; i < len; ++i) mx = std::max(mx, out[base + i * stride]);
    double total = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      double e = std::exp(out[base + i * stride] - mx);
      out[base + i * stride] = e;
      total += e;
    }
    for (std::size_t i = 0; i < len; ++i) out[base + i * stride] /= total;
  }
  return push(OpKind::kSoftmax, {a}, std::move(out), axis);
}

NodeId Graph::concat(NodeId a, NodeId b, std::size_t axis) {
  const Tensor& ta = node(a).value;
  const Tensor& tb = node(b).value;
  if (ta.rank() != tb.rank()) {
    throw DimensionError("concat: rank mismatch " + ta.shape_str() + " vs " + tb.shape_str());
  }
  if (ta.rank() == 1) {
    if (axis != 0) throw ContractError("concat: axis out of range for rank-1 tensor");
    std::vector<double> out;
    out.reserve(ta.size() + tb.size());
    out.insert(out.end(), ta.data().begin(), ta.data().end());
    out.insert(out.end(), tb.data().begin(), tb.data().end());
    return push(OpKind::kConcat, {a, b}, Tensor::vector(std::move(out)), axis);
  }
  if (ta.rank() != 2 || axis > 1) {
    throw ContractError("concat: only rank-1 and rank-2 tensors supported");
  }
  std::size_t off_axis = 1 - axis;
  if (ta.shape()[off_axis] != tb.shape()[off_axis]) {
    throw DimensionError("concat: non-axis dimensions disagree, " + ta.shape_str() + " vs " +
                         tb.shape_str());
  }
  if (axis == 0) {
    std::vector<double> out;
    out.reserve(ta.size() + tb.size());
    out.insert(out.end(), ta.data().begin(), ta.data().end());
    out.insert(out.end(), tb.data().begin(), tb.data().end());
    return push(OpKind::kConcat, {a, b},
                Tensor::matrix(ta.shape()[0] + tb.shape()[0], ta.shape()[1], std::move(out)), axis);
  }
  std::size_t rows = ta.shape()[0];
  std::size_t ca = ta.shape()[1], cb = tb.shape()[1];
  Tensor out({rows, ca + cb});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < ca; ++c) out[r * (ca + cb) + c] = ta[r * ca + c];
    for (std::size_t c = 0; c < cb; ++c) out[r * (ca + cb) + ca + c] = tb[r * cb + c];
  }
  return push(OpKind::kConcat, {a, b}, std::move(out), axis);
}

NodeId Graph::stack_rows(std::span<const NodeId> rows) {
  if (rows.empty()) throw ContractError("stack_rows: empty row list");
  std::size_t n = node(rows[0]).value.size();
  std::vector<double> out;
  out.reserve(rows.size() * n);
  std::vector<NodeId> inputs;
  inputs.reserve(rows.size());
  for (NodeId r : rows) {
    const Tensor& t = node(r).value;
    if (t.rank() != 1 || t.size() != n) {
      throw DimensionError("stack_rows: expected rank-1 rows of length " + std::to_string(n) +
                           ", got " + t.shape_str());
    }
    out.insert(out.end(), t.data().begin(), t.data().end());
    inputs.push_back(r);
  }
  return push(OpKind::kStackRows, std::move(inputs),
              Tensor::matrix(rows.size(), n, std::move(out)));
}

NodeId Graph::sum_rows(NodeId a) {
  const Tensor& ta = node(a).value;
  if (ta.rank() != 2) throw DimensionError("sum_rows: expected rank-2, got " + ta.shape_str());
  std::size_t rows = ta.shape()[0], cols = ta.shape()[1];
  Tensor out({cols});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c] += ta[r * cols + c];
  }
  return push(OpKind::kSumRows, {a}, std::move(out));
}

NodeId Graph::sum_all(NodeId a) {
  const Tensor& ta = node(a).value;
  double total = 0.0;
  for (double x : ta.data()) total += x;
  return push(OpKind::kSumAll, {a}, Tensor::scalar(total));
}

NodeId Graph::transpose(NodeId a) {
  const Tensor& ta = node(a).value;
  if (ta.rank() != 2) throw DimensionError("transpose: expected rank-2, got " + ta.shape_str());
  std::size_t rows = ta.shape()[0], cols = ta.shape()[1];
  Tensor out({cols, rows});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = ta[r * cols + c];
  }
  return push(OpKind::kTranspose, {a}, std::move(out));
}

NodeId Graph::reshape(NodeId a, std::vector<std::size_t> shape) {
  const Tensor& ta = node(a).value;
  Tensor out(std::move(shape), std::vector<double>(ta.data().begin(), ta.data().end()));
  return push(OpKind::kReshape, {a}, std::move(out));
}

NodeId Graph::layer_norm(NodeId x, NodeId gain, NodeId offset, double epsilon) {
  const Tensor& tx = node(x).value;
  const Tensor& tg = node(gain).value;
  const Tensor& tb = node(offset).value;
  if (tx.rank() != 1) throw DimensionError("layer_norm: expected rank-1 input, got " + tx.shape_str());
  std::size_t m = tx.size();
  if (m < 2) throw ContractError("layer_norm: needs at least 2 features, got " + std::to_string(m));
  require_same_shape(tx, tg, "layer_norm gain");
  require_same_shape(tx, tb, "layer_norm offset");
  double mean = 0.0;
  for (double v : tx.data()) mean += v;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (double v : tx.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m);
  double inv_sigma = 1.0 / std::sqrt(var + epsilon);
  Tensor out({m});
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = (tx[i] - mean) * inv_sigma * tg[i] + tb[i];
  }
  return push(OpKind::kLayerNorm, {x, gain, offset}, std::move(out), 0, epsilon);
}

void Graph::backward(NodeId loss) {
  const Node& ln = node(loss);
  if (ln.value.size() != 1) {
    throw ContractError("backward: loss must be scalar, got " + ln.value.shape_str());
  }
  // Reset accumulators for the whole tape, then seed the loss with 1.
  for (Node& n : nodes_) n.grad = Tensor(n.value.shape());
  nodes_[loss.index].grad[0] = 1.0;
  backward_ran_ = true;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    propagate(nodes_[i]);
  }
}

void Graph::propagate(const Node& n) {
  if (n.inputs.empty()) return;
  const Tensor& g = n.grad;
  auto input_grad = [this](NodeId id) -> Tensor& { return nodes_[id.index].grad; };
  switch (n.op) {
    case OpKind::kLeaf:
      break;
    case OpKind::kMatMul: {
      const Tensor& a = nodes_[n.inputs[0].index].value;
      const Tensor& b = nodes_[n.inputs[1].index].value;
      Tensor& da = input_grad(n.inputs[0]);
      Tensor& db = input_grad(n.inputs[1]);
      std::size_t r = a.shape()[0], k = a.shape()[1];
      if (b.rank() == 1) {
        for (std::size_t i = 0; i < r; ++i) {
          double gi = g[i];
          if (gi == 0.0) continue;
          for (std::size_t j = 0; j < k; ++j) {
            da[i * k + j] += gi * b[j];
            db[j] += gi * a[i * k + j];
          }
        }
      } else {
        std::size_t c = b.shape()[1];
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t col = 0; col < c; ++col) {
            double gi = g[i * c + col];
            if (gi == 0.0) continue;
            for (std::size_t j = 0; j < k; ++j) {
              da[i * k + j] += gi * b[j * c + col];
              db[j * c + col] += gi * a[i * k + j];
            }
          }
        }
      }
      break;
    }
    case OpKind::kAdd: {
      Tensor& da = input_grad(n.inputs[0]);
      Tensor& db = input_grad(n.inputs[1]);
      for (std::size_t i = 0; i < g.size(); ++i) {
        da[i] += g[i];
        db[i] += g[i];
      }
      break;
    }
    case OpKind::kSub: {
      Tensor& da = input_grad(n.inputs[0]);
      Tensor& db = input_grad(n.inputs[1]);
      for (std::size_t i = 0; i < g.size(); ++i) {
        da[i] += g[i];
        db[i] -= g[i];
      }
      break;
    }
    case OpKind::kHadamard: {
      const Tensor& a = nodes_[n.inputs[0].index].value;
      const Tensor& b = nodes_[n.inputs[1].index].value;
      Tensor& da = input_grad(n.inputs[0]);
      Tensor& db = input_grad(n.inputs[1]);
      for (std::size_t i = 0; i < g.size(); ++i) {
        da[i] += g[i] * b[i];
        db[i] += g[i] * a[i];
      }
      break;
    }
    case OpKind::kSigmoid: {
      Tensor& da = input_grad(n.inputs[0]);
      for (std::size_t i = 0; i < g.size(); ++i) {
        double y = n.value[i];
        da[i] += g[i] * y * (1.0 - y);
      }
      break;
    }
    case OpKind::kTanh: {
      Tensor& da = input_grad(n.inputs[0]);
      for (std::size_t i = 0; i < g.size(); ++i) {
        double y = n.value[i];
        da[i] += g[i] * (1.0 - y * y);
      }
      break;
    }
    case OpKind::kRelu: {
      const Tensor& a = nodes_[n.inputs[0].index].value;
      Tensor& da = input_grad(n.inputs[0]);
      // subgradient at exactly 0 is taken as 0
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (a[i] > 0.0) da[i] += g[i];
      }
      break;
    }
    case OpKind::kSoftmax: {
      const Tensor& y = n.value;
      Tensor& da = input_grad(n.inputs[0]);
      std::size_t nslices, len, stride, base_step;
      if (y.rank() == 1 || n.axis == 1) {
        nslices = y.rank() == 1 ? 1 : y.shape()[0];
        len = y.rank() == 1 ? y.shape()[0] : y.shape()[1];
        stride = 1;
        base_step = len;
      } else {
        nslices = y.shape()[1];
        len = y.shape()[0];
        stride = y.shape()[1];
        base_step = 1;
      }
      for (std::size_t s = 0; s < nslices; ++s) {
        std::size_t base = s * base_step;
        double dot = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
          dot += g[base + i * stride] * y[base + i * stride];
        }
        for (std::size_t i = 0; i < len; ++i) {
          da[base + i * stride] += y[base + i * stride] * (g[base + i * stride] - dot);
        }
      }
      break;
    }
    case OpKind::kConcat: {
      const Tensor& a = nodes_[n.inputs[0].index].value;
      const Tensor& b = nodes_[n.inputs[1].index].value;
      Tensor& da = input_grad(n.inputs[0]);
      Tensor& db = input_grad(n.inputs[1]);
      if (a.rank() == 1 || n.axis == 0) {
        for (std::size_t i = 0; i < a.size(); ++i) da[i] += g[i];
        for (std::size_t i = 0; i < b.size(); ++i) db[i] += g[a.size() + i];
      } else {
        std::size_t rows = a.shape()[0];
        std::size_t ca = a.shape()[1], cb = b.shape()[1];
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < ca; ++c) da[r * ca + c] += g[r * (ca + cb) + c];
          for (std::size_t c = 0; c < cb; ++c) db[r * cb + c] += g[r * (ca + cb) + ca + c];
        }
      }
      break;
    }
    case OpKind::kStackRows: {
      std::size_t cols = n.value.shape()[1];
      for (std::size_t r = 0; r < n.inputs.size(); ++r) {
        Tensor& dr = input_grad(n.inputs[r]);
        for (std::size_t c = 0; c < cols; ++c) dr[c] += g[r * cols + c];
      }
      break;
    }
    case OpKind::kSumRows: {
      const Tensor& a = nodes_[n.inputs[0].index].value;
      Tensor& da = input_grad(n.inputs[0]);
      std::size_t rows = a.shape()[0], cols = a.shape()[1];
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) da[r * cols + c] += g[c];
      }
      break;
    }
    case OpKind::kSumAll: {
      Tensor& da = input_grad(n.inputs[0]);
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[0];
      break;
    }
    case OpKind::kTranspose: {
      Tensor& da = input_grad(n.inputs[0]);
      std::size_t rows = n.value.shape()[0], cols = n.value.shape()[1];
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) da[c * rows + r] += g[r * cols + c];
      }
      break;
    }
    case OpKind::kReshape: {
      Tensor& da = input_grad(n.inputs[0]);
      for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
      break;
    }
    case OpKind::kLayerNorm: {
      const Tensor& x = nodes_[n.inputs[0].index].value;
      const Tensor& gain = nodes_[n.inputs[1].index].value;
      Tensor& dx = input_grad(n.inputs[0]);
      Tensor& dgain = input_grad(n.inputs[1]);
      Tensor& doffset = input_grad(n.inputs[2]);
      std::size_t m = x.size();
      double dm = static_cast<double>(m);
      double mean = 0.0;
      for (double v : x.data()) mean += v;
      mean /= dm;
      double var = 0.0;
      for (double v : x.data()) var += (v - mean) * (v - mean);
      var /= dm;
      double inv_sigma = 1.0 / std::sqrt(var + n.scalar_aux);
      // dxhat = g ⊙ gain; dx = (dxhat − mean(dxhat) − xhat·mean(dxhat⊙xhat)) / σ
      double mean_dxhat = 0.0;
      double mean_dxhat_xhat = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double xhat = (x[i] - mean) * inv_sigma;
        double dxhat = g[i] * gain[i];
        mean_dxhat += dxhat;
        mean_dxhat_xhat += dxhat * xhat;
      }
      mean_dxhat /= dm;
      mean_dxhat_xhat /= dm;
      for (std::size_t i = 0; i < m; ++i) {
        double xhat = (x[i] - mean) * inv_sigma;
        double dxhat = g[i] * gain[i];
        dx[i] += (dxhat - mean_dxhat - xhat * mean_dxhat_xhat) * inv_sigma;
        dgain[i] += g[i] * xhat;
        doffset[i] += g[i];
      }
      break;
    }
  }
}

}  // namespace attnfc
