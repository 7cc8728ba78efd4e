#include "cache.hpp"

#include "error.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sdwave {

namespace {

constexpr char kMagic[4] = {'S', 'D', 'W', 'C'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "cache format is little-endian");

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error(ErrorCode::io, "cache: truncated stream");
  return v;
}

void put_header(std::ostream& os, std::uint32_t tag) {
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, tag);
}

void get_header(std::istream& is, std::uint32_t tag) {
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4))
    throw Error(ErrorCode::io, "cache: bad magic");
  if (get<std::uint32_t>(is) != kVersion) throw Error(ErrorCode::io, "cache: unsupported version");
  if (get<std::uint32_t>(is) != tag) throw Error(ErrorCode::io, "cache: unexpected record type");
}

void put_config(std::ostream& os, const CorrectorConfig& c) {
  put<std::int32_t>(os, c.k);
  put<double>(os, c.tau);
  put<std::int32_t>(os, static_cast<std::int32_t>(c.form));
}

CorrectorConfig get_config(std::istream& is) {
  CorrectorConfig c;
  c.k = get<std::int32_t>(is);
  c.tau = get<double>(is);
  c.form = static_cast<FormChoice>(get<std::int32_t>(is));
  return c;
}

void put_vector(std::ostream& os, const Vector& v) {
  put<std::int64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(v.size())));
}

Vector get_vector(std::istream& is) {
  const auto n = get<std::int64_t>(is);
  if (n < 0) throw Error(ErrorCode::io, "cache: negative length");
  Vector v(n);
  if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(n))))
    throw Error(ErrorCode::io, "cache: truncated vector");
  return v;
}

void put_ints(std::ostream& os, const std::vector<int>& v) {
  put<std::int64_t>(os, static_cast<std::int64_t>(v.size()));
  for (int i : v) put<std::int32_t>(os, i);
}

std::vector<int> get_ints(std::istream& is) {
  const auto n = get<std::int64_t>(is);
  if (n < 0) throw Error(ErrorCode::io, "cache: negative length");
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int& i : v) i = get<std::int32_t>(is);
  return v;
}

void put_dense(std::ostream& os, const DenseMatrix& m) {
  put<std::int64_t>(os, m.rows());
  put<std::int64_t>(os, m.cols());
  os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
}

DenseMatrix get_dense(std::istream& is) {
  const auto r = get<std::int64_t>(is);
  const auto c = get<std::int64_t>(is);
  if (r < 0 || c < 0) throw Error(ErrorCode::io, "cache: negative size");
  DenseMatrix m(r, c);
  if (!is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size()))))
    throw Error(ErrorCode::io, "cache: truncated matrix");
  return m;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::string CacheKey::to_string() const {
  std::ostringstream os;
  os << std::setprecision(17) << "p=" << p << ";q=" << q << ";seed=" << seed << ";lo=" << lo << ";hi=" << hi
     << ";law=" << law << ";block=" << block << ";tau=" << tau << ";k=" << k
     << ";form=" << static_cast<int>(form);
  return os.str();
}

void write_corrector_set(std::ostream& os, const CorrectorSet& set) {
  put_header(os, 1);
  put_config(os, set.config);
  const SparseMatrix& Phi = set.Phi;
  put<std::int64_t>(os, Phi.rows());
  put<std::int64_t>(os, Phi.cols());
  put<std::int64_t>(os, Phi.nonZeros());
  for (Index k = 0; k < Phi.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(Phi, k); it; ++it) {
      put<std::int32_t>(os, static_cast<std::int32_t>(it.row()));
      put<std::int32_t>(os, static_cast<std::int32_t>(it.col()));
      put<double>(os, it.value());
    }
  }
  if (!os) throw Error(ErrorCode::io, "cache: write failed");
}

CorrectorSet read_corrector_set(std::istream& is, const Problem& problem) {
  get_header(is, 1);
  const CorrectorConfig config = get_config(is);
  const auto rows = get<std::int64_t>(is);
  const auto cols = get<std::int64_t>(is);
  const auto nnz = get<std::int64_t>(is);
  if (rows != problem.fine_dofs() || cols != problem.coarse_dofs())
    throw Error(ErrorCode::io, "cache: corrector set does not match the problem");
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  for (std::int64_t i = 0; i < nnz; ++i) {
    const auto r = get<std::int32_t>(is);
    const auto c = get<std::int32_t>(is);
    entries.emplace_back(r, c, get<double>(is));
  }
  SparseMatrix Phi(rows, cols);
  Phi.setFromTriplets(entries.begin(), entries.end());
  return make_corrector_set(problem, config, std::move(Phi));
}

void write_transient(std::ostream& os, const TransientCorrectors& t) {
  put_header(os, 2);
  put_config(os, t.config);
  put<std::int32_t>(os, t.horizon);
  put<double>(os, t.stop_tol);
  put<std::int64_t>(os, static_cast<std::int64_t>(t.nodes.size()));
  for (const NodeTransient& node : t.nodes) {
    put<std::int32_t>(os, node.coarse_dof);
    put_ints(os, node.dofs);
    put<std::int64_t>(os, static_cast<std::int64_t>(node.xi.size()));
    for (const Vector& v : node.xi) put_vector(os, v);
  }
  if (!os) throw Error(ErrorCode::io, "cache: write failed");
}

TransientCorrectors read_transient(std::istream& is) {
  get_header(is, 2);
  TransientCorrectors t;
  t.config = get_config(is);
  t.horizon = get<std::int32_t>(is);
  t.stop_tol = get<double>(is);
  const auto n = get<std::int64_t>(is);
  t.nodes.resize(static_cast<std::size_t>(n));
  for (NodeTransient& node : t.nodes) {
    node.coarse_dof = get<std::int32_t>(is);
    node.dofs = get_ints(is);
    const auto count = get<std::int64_t>(is);
    for (std::int64_t l = 0; l < count; ++l) node.xi.push_back(get_vector(is));
  }
  return t;
}

void write_reduced_basis(std::ostream& os, const ReducedBasis& b) {
  put_header(os, 3);
  put<std::int32_t>(os, b.coarse_dof);
  put<std::int32_t>(os, b.m_selected);
  put_ints(os, b.dofs);
  put_dense(os, b.Z);
  put_dense(os, b.KZ);
  put_dense(os, b.A_hat);
  put_dense(os, b.K_hat);
  if (!os) throw Error(ErrorCode::io, "cache: write failed");
}

ReducedBasis read_reduced_basis(std::istream& is) {
  get_header(is, 3);
  ReducedBasis b;
  b.coarse_dof = get<std::int32_t>(is);
  b.m_selected = get<std::int32_t>(is);
  b.dofs = get_ints(is);
  b.Z = get_dense(is);
  b.KZ = get_dense(is);
  b.A_hat = get_dense(is);
  b.K_hat = get_dense(is);
  return b;
}

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::io, "cannot open " + tmp.string() + " for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw Error(ErrorCode::io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

CorrectorCache::CorrectorCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create cache directory " + dir_.string() + ": " + ec.message());
  }
}

std::filesystem::path CorrectorCache::file_for(const std::string& kind, const std::string& key) const {
  std::ostringstream name;
  name << kind << '-' << std::hex << std::setw(16) << std::setfill('0') << fnv1a(key) << ".bin";
  return dir_ / name.str();
}

namespace {

/// Files start with the key string so hash collisions are detected.
std::optional<std::string> read_keyed(const std::filesystem::path& path, const std::string& key) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  std::string stored;
  if (!std::getline(is, stored) || stored != key) return std::nullopt;
  std::ostringstream rest;
  rest << is.rdbuf();
  return rest.str();
}

}  // namespace

std::optional<CorrectorSet> CorrectorCache::load_correctors(const CacheKey& key, const Problem& problem) {
  if (enabled()) {
    const std::string k = key.to_string();
    if (auto bytes = read_keyed(file_for("correctors", k), k)) {
      std::istringstream is(*bytes);
      try {
        CorrectorSet set = read_corrector_set(is, problem);
        ++hits_;
        return set;
      } catch (const Error&) {
      }
    }
  }
  ++misses_;
  return std::nullopt;
}

void CorrectorCache::store_correctors(const CacheKey& key, const CorrectorSet& set) {
  if (!enabled()) return;
  const std::string k = key.to_string();
  std::ostringstream os;
  os << k << '\n';
  write_corrector_set(os, set);
  atomic_write(file_for("correctors", k), os.str());
}

std::optional<TransientCorrectors> CorrectorCache::load_transient(const CacheKey& key, int horizon, double stop_tol) {
  if (enabled()) {
    const std::string k = key.to_string();
    if (auto bytes = read_keyed(file_for("transient", k), k)) {
      std::istringstream is(*bytes);
      try {
        TransientCorrectors t = read_transient(is);
        if (t.horizon >= horizon && t.stop_tol == stop_tol) {
          t.horizon = horizon;
          for (NodeTransient& node : t.nodes)
            if (static_cast<int>(node.xi.size()) > horizon) node.xi.resize(static_cast<std::size_t>(horizon));
          ++hits_;
          return t;
        }
      } catch (const Error&) {
      }
    }
  }
  ++misses_;
  return std::nullopt;
}

void CorrectorCache::store_transient(const CacheKey& key, const TransientCorrectors& transient) {
  if (!enabled()) return;
  const std::string k = key.to_string();
  std::ostringstream os;
  os << k << '\n';
  write_transient(os, transient);
  atomic_write(file_for("transient", k), os.str());
}

}  // namespace sdwave
