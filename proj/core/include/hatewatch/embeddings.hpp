#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hatewatch {

struct EmbeddingParams {
  std::size_t dimension = 100;
  std::size_t window = 5;
  std::size_t min_count = 5;
  std::size_t negative_samples = 5;
  std::size_t epochs = 5;
  double initial_learning_rate = 0.025;
  double subsample_threshold = 1e-3;  // 0 disables subsampling
  std::uint64_t seed = 1;
  // 1 is deterministic. More workers train lock-free on shared vectors and
  // are not reproducible run to run.
  unsigned workers = 1;

  void validate() const;
  std::string fingerprint() const;
};

// Dense vectors keyed by token, all of one dimension.
class VectorStore {
 public:
  VectorStore() = default;
  explicit VectorStore(std::size_t dimension) : dim_(dimension) {}

  // Throws Error(kFormat) on a duplicate token or wrong dimension.
  void add(std::string token, std::span<const float> values);

  std::size_t size() const { return vocab_.size(); }
  std::size_t dimension() const { return dim_; }
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  std::optional<std::size_t> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  std::span<const float> vector(std::size_t row) const {
    return {data_.data() + row * dim_, dim_};
  }
  std::span<const float> vector(std::string_view token) const;
  double norm(std::size_t row) const { return norms_[row]; }

  const std::string& params_fingerprint() const { return fingerprint_; }
  void set_params_fingerprint(std::string fp) { fingerprint_ = std::move(fp); }

  friend bool operator==(const VectorStore& a, const VectorStore& b) {
    return a.dim_ == b.dim_ && a.vocab_ == b.vocab_ && a.data_ == b.data_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> vocab_;
  std::vector<float> data_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string fingerprint_;
};

struct TrainingResult {
  VectorStore store;
  std::vector<double> epoch_losses;  // mean negative-sampling loss per prediction
  std::uint64_t train_words = 0;     // corpus tokens kept by min_count
};

// CBOW with negative sampling: the mean of the context input vectors
// predicts the center word against `negative_samples` noise words drawn from
// the unigram distribution raised to 3/4. Returns the input-side vectors.
// Throws Error(kTraining) when fewer than two word types survive min_count.
TrainingResult train_cbow(const std::vector<std::vector<std::string>>& sentences,
                          const EmbeddingParams& params);

// Text exchange format: "vocab_size dimension" header, then one line per
// token: "token v1 v2 ... vd".
VectorStore load_vectors(const std::string& path);
VectorStore parse_vectors(std::istream& in, const std::string& source_name = "<stream>");
void save_vectors(const VectorStore& store, const std::string& path);
void write_vectors(const VectorStore& store, std::ostream& out);

// Throws Error(kInvalidArgument) on dimension mismatch and
// Error(kUndefinedInput) on a zero-norm input.
double cosine(std::span<const float> a, std::span<const float> b);

struct Neighbor {
  std::string token;
  double score = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Exhaustive top-k by descending cosine, query excluded, ties broken by
// token. Throws Error(kOutOfVocabulary) for unknown queries.
std::vector<Neighbor> nearest_neighbors(const VectorStore& store, std::string_view query,
                                        std::size_t k);

}  // namespace hatewatch
