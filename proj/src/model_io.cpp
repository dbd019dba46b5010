#include "cem/model_io.hpp"

#include <cstring>
#include <istream>
#include <ostream>

#include "cem/boosting.hpp"
#include "cem/error.hpp"
#include "cem/forest.hpp"
#include "cem/glm.hpp"
#include "cem/nn.hpp"
#include "cem/svr.hpp"
#include "cem/tree.hpp"

namespace cem {

void BinaryWriter::u8(std::uint8_t v) { out.put(static_cast<char>(v)); }

void BinaryWriter::u32(std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 4);
}

void BinaryWriter::u64(std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

void BinaryWriter::f64(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  u64(bits);
}

void BinaryWriter::str(const std::string& s) {
  u64(s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::vec(const std::vector<double>& v) {
  u64(v.size());
  for (double x : v) f64(x);
}

void BinaryWriter::matrix(const Matrix& m) {
  u64(m.rows());
  u64(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) f64(m(i, j));
}

std::uint8_t BinaryReader::u8() {
  const int c = in.get();
  if (c < 0) throw ParseError("model file truncated");
  return static_cast<std::uint8_t>(c);
}

std::uint32_t BinaryReader::u32() {
  char buf[4];
  if (!in.read(buf, 4)) throw ParseError("model file truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

std::uint64_t BinaryReader::u64() {
  char buf[8];
  if (!in.read(buf, 8)) throw ParseError("model file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

double BinaryReader::f64() {
  const std::uint64_t bits = u64();
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::string BinaryReader::str() {
  const std::uint64_t n = u64();
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n)))
    throw ParseError("model file truncated");
  return s;
}

std::vector<double> BinaryReader::vec() {
  const std::uint64_t n = u64();
  std::vector<double> v(n);
  for (auto& x : v) x = f64();
  return v;
}

Matrix BinaryReader::matrix() {
  const std::uint64_t r = u64();
  const std::uint64_t c = u64();
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = f64();
  return m;
}

namespace {

void write_tree_nodes(BinaryWriter& w, const std::vector<TreeNode>& nodes) {
  w.u64(nodes.size());
  for (const auto& nd : nodes) {
    w.u32(static_cast<std::uint32_t>(nd.feature + 1));
    w.f64(nd.threshold);
    w.u32(static_cast<std::uint32_t>(nd.left + 1));
    w.u32(static_cast<std::uint32_t>(nd.right + 1));
    w.f64(nd.value);
    w.f64(nd.weight);
    w.f64(nd.sse);
  }
}

std::vector<TreeNode> read_tree_nodes(BinaryReader& r) {
  const std::uint64_t n = r.u64();
  std::vector<TreeNode> nodes(n);
  for (auto& nd : nodes) {
    nd.feature = static_cast<int>(r.u32()) - 1;
    nd.threshold = r.f64();
    nd.left = static_cast<int>(r.u32()) - 1;
    nd.right = static_cast<int>(r.u32()) - 1;
    nd.value = r.f64();
    nd.weight = r.f64();
    nd.sse = r.f64();
  }
  return nodes;
}

void write_xgb_trees(BinaryWriter& w, const std::vector<XgbTree>& trees) {
  w.u64(trees.size());
  for (const auto& t : trees) {
    w.u64(t.nodes.size());
    for (const auto& nd : t.nodes) {
      w.u32(static_cast<std::uint32_t>(nd.feature + 1));
      w.f64(nd.threshold);
      w.u32(static_cast<std::uint32_t>(nd.left + 1));
      w.u32(static_cast<std::uint32_t>(nd.right + 1));
      w.f64(nd.weight);
    }
  }
}

std::vector<XgbTree> read_xgb_trees(BinaryReader& r) {
  std::vector<XgbTree> trees(r.u64());
  for (auto& t : trees) {
    t.nodes.resize(r.u64());
    for (auto& nd : t.nodes) {
      nd.feature = static_cast<int>(r.u32()) - 1;
      nd.threshold = r.f64();
      nd.left = static_cast<int>(r.u32()) - 1;
      nd.right = static_cast<int>(r.u32()) - 1;
      nd.weight = r.f64();
    }
  }
  return trees;
}

}  // namespace

void save_regressor(const Regressor& model, std::ostream& out) {
  BinaryWriter w{out};
  w.u32(kRegressorMagic);
  w.u32(kRegressorVersion);
  w.str(family_to_string(model.family()));
  w.u64(model.feature_count());

  switch (model.family()) {
    case Family::cart: {
      const auto& m = static_cast<const CartModel&>(model);
      write_tree_nodes(w, m.nodes());
      break;
    }
    case Family::random_forest: {
      const auto& m = static_cast<const ForestModel&>(model);
      w.u64(m.trees().size());
      for (const auto& t : m.trees()) write_tree_nodes(w, t.nodes());
      break;
    }
    case Family::gbdt: {
      const auto& m = static_cast<const GbdtModel&>(model);
      w.f64(m.init());
      w.f64(m.learning_rate());
      w.u64(m.trees().size());
      for (const auto& t : m.trees()) write_tree_nodes(w, t.nodes());
      break;
    }
    case Family::xgb: {
      const auto& m = static_cast<const XgbModel&>(model);
      w.f64(m.init());
      w.f64(m.learning_rate());
      write_xgb_trees(w, m.trees());
      break;
    }
    case Family::svr: {
      const auto& m = static_cast<const SvrModel&>(model);
      const auto& p = m.params();
      w.u8(p.kernel == SvrKernel::rbf ? 1 : 0);
      w.f64(p.C);
      w.f64(p.epsilon);
      w.f64(p.sigma2);
      w.f64(m.bias());
      w.f64(m.max_kkt_residual());
      w.vec(m.beta());
      w.matrix(m.support_vectors());
      break;
    }
    case Family::nn: {
      const auto& m = static_cast<const NnModel&>(model);
      w.matrix(m.hidden_weights());
      w.vec(m.hidden_bias());
      w.vec(m.output_weights());
      w.f64(m.output_bias());
      w.f64(m.target_mean());
      w.f64(m.target_scale());
      break;
    }
    case Family::linear:
    case Family::log_linear:
    case Family::poisson: {
      const auto& m = static_cast<const GlmModel&>(model);
      w.vec(m.coefficients());
      break;
    }
    case Family::constant_mean: {
      const auto& m = static_cast<const ConstantModel&>(model);
      w.f64(m.value());
      break;
    }
  }
}

std::unique_ptr<Regressor> load_regressor(std::istream& in) {
  BinaryReader r{in};
  if (r.u32() != kRegressorMagic) throw ParseError("not a model file");
  const std::uint32_t version = r.u32();
  if (version != kRegressorVersion)
    throw ParseError("unsupported model version " + std::to_string(version));
  const Family family = family_from_string(r.str());
  const std::size_t features = r.u64();

  switch (family) {
    case Family::cart:
      return std::make_unique<CartModel>(read_tree_nodes(r), features);
    case Family::random_forest: {
      std::vector<CartModel> trees;
      const std::uint64_t n = r.u64();
      trees.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i)
        trees.emplace_back(read_tree_nodes(r), features);
      return std::make_unique<ForestModel>(std::move(trees), features);
    }
    case Family::gbdt: {
      const double init = r.f64();
      const double lr = r.f64();
      std::vector<CartModel> trees;
      const std::uint64_t n = r.u64();
      trees.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i)
        trees.emplace_back(read_tree_nodes(r), features);
      return std::make_unique<GbdtModel>(init, lr, std::move(trees), features,
                                         std::vector<double>{});
    }
    case Family::xgb: {
      const double init = r.f64();
      const double lr = r.f64();
      return std::make_unique<XgbModel>(init, lr, read_xgb_trees(r), features,
                                        std::vector<double>{});
    }
    case Family::svr: {
      SvrParams p;
      p.kernel = r.u8() ? SvrKernel::rbf : SvrKernel::linear;
      p.C = r.f64();
      p.epsilon = r.f64();
      p.sigma2 = r.f64();
      const double bias = r.f64();
      const double kkt = r.f64();
      std::vector<double> beta = r.vec();
      Matrix sv = r.matrix();
      return std::make_unique<SvrModel>(std::move(sv), std::move(beta), bias, p,
                                        features, kkt);
    }
    case Family::nn: {
      Matrix w1 = r.matrix();
      std::vector<double> b1 = r.vec();
      std::vector<double> w2 = r.vec();
      const double b2 = r.f64();
      const double ym = r.f64();
      const double ys = r.f64();
      return std::make_unique<NnModel>(std::move(w1), std::move(b1), std::move(w2), b2,
                                       ym, ys, NnParams{});
    }
    case Family::linear:
    case Family::log_linear:
    case Family::poisson:
      return std::make_unique<GlmModel>(family, r.vec(), features);
    case Family::constant_mean:
      return std::make_unique<ConstantModel>(r.f64(), features);
  }
  throw ParseError("corrupt model file");
}

}  // namespace cem
