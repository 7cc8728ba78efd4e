#pragma once

// Binary on-disk cache for corrector sets, transient correctors and reduced
// bases, keyed by everything that determines them.

#include "lod.hpp"
#include "rb.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace sdwave {

struct CacheKey {
  int p = 0;
  int q = 0;
  std::uint64_t seed = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::string law;
  int block = 0;
  double tau = 0.0;
  int k = 0;
  FormChoice form = FormChoice::a_plus_tau_b;

  std::string to_string() const;
};

void write_corrector_set(std::ostream& os, const CorrectorSet& set);
/// Q and the coarse matrices are rebuilt from the stored Phi.
CorrectorSet read_corrector_set(std::istream& is, const Problem& problem);

void write_transient(std::ostream& os, const TransientCorrectors& transient);
TransientCorrectors read_transient(std::istream& is);

void write_reduced_basis(std::ostream& os, const ReducedBasis& basis);
ReducedBasis read_reduced_basis(std::istream& is);

/// Write to a temporary sibling, then rename over the target.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

class CorrectorCache {
 public:
  /// An empty directory disables the cache (every lookup is a miss).
  explicit CorrectorCache(std::filesystem::path dir = {});

  std::optional<CorrectorSet> load_correctors(const CacheKey& key, const Problem& problem);
  void store_correctors(const CacheKey& key, const CorrectorSet& set);

  std::optional<TransientCorrectors> load_transient(const CacheKey& key, int horizon, double stop_tol);
  void store_transient(const CacheKey& key, const TransientCorrectors& transient);

  bool enabled() const { return !dir_.empty(); }
  int hits() const { return hits_; }
  int misses() const { return misses_; }

 private:
  std::filesystem::path file_for(const std::string& kind, const std::string& key) const;

  std::filesystem::path dir_;
  int hits_ = 0;
  int misses_ = 0;
};

}  // namespace sdwave
