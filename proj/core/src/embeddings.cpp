#include "hatewatch/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "hatewatch/error.hpp"

namespace hatewatch {

void EmbeddingParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
  };
  require(dimension > 0, "dimension must be positive");
  require(window > 0, "window must be positive");
  require(min_count > 0, "min_count must be positive");
  require(epochs > 0, "epochs must be positive");
  require(initial_learning_rate > 0.0, "initial_learning_rate must be positive");
  require(subsample_threshold >= 0.0, "subsample_threshold must be non-negative");
  require(workers > 0, "workers must be positive");
}

std::string EmbeddingParams::fingerprint() const {
  std::ostringstream out;
  out << "cbow-ns dim=" << dimension << " window=" << window << " min_count=" << min_count
      << " negative=" << negative_samples << " epochs=" << epochs
      << " alpha=" << initial_learning_rate << " sample=" << subsample_threshold
      << " seed=" << seed;
  return out.str();
}

void VectorStore::add(std::string token, std::span<const float> values) {
  if (values.size() != dim_) {
    throw Error(ErrorCode::kFormat, "vector for \"" + token + "\" has dimension " +
                                        std::to_string(values.size()) + ", expected " +
                                        std::to_string(dim_));
  }
  if (index_.contains(token)) throw Error(ErrorCode::kFormat, "duplicate token \"" + token + "\"");
  double sq = 0.0;
  for (float v : values) sq += static_cast<double>(v) * v;
  index_.emplace(token, vocab_.size());
  vocab_.push_back(std::move(token));
  data_.insert(data_.end(), values.begin(), values.end());
  norms_.push_back(std::sqrt(sq));
}

std::optional<std::size_t> VectorStore::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> VectorStore::vector(std::string_view token) const {
  auto row = find(token);
  if (!row) throw Error(ErrorCode::kOutOfVocabulary, "not in vocabulary: " + std::string(token));
  return vector(*row);
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kInvalidArgument, "dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kUndefinedInput, "cosine of a zero vector");
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

std::vector<Neighbor> nearest_neighbors(const VectorStore& store, std::string_view query,
                                        std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  const auto q = store.find(query);
  if (!q) throw Error(ErrorCode::kOutOfVocabulary, "not in vocabulary: " + std::string(query));
  const auto qv = store.vector(*q);
  const double qn = store.norm(*q);
  if (qn == 0.0) throw Error(ErrorCode::kUndefinedInput, "query has a zero vector");

  std::vector<Neighbor> all;
  all.reserve(store.size());
  const std::size_t dim = store.dimension();
  for (std::size_t row = 0; row < store.size(); ++row) {
    if (row == *q || store.norm(row) == 0.0) continue;
    const auto v = store.vector(row);
    double dot = 0.0;
    for (std::size_t i = 0; i < dim; ++i) dot += static_cast<double>(qv[i]) * v[i];
    all.push_back({store.vocabulary()[row], std::clamp(dot / (qn * store.norm(row)), -1.0, 1.0)});
  }
  auto better = [](const Neighbor& a, const Neighbor& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.token < b.token;
  };
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), better);
  all.resize(take);
  return all;
}

namespace {

// The classic word2vec linear congruential generator; cheap and identical on
// every platform.
class Lcg {
 public:
  explicit Lcg(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ = state_ * 25214903917ULL + 11ULL;
    return state_;
  }
  // Uniform in [0, 1).
  double uniform() { return static_cast<double>((next() >> 16) & 0xFFFFFFFFULL) / 4294967296.0; }

 private:
  std::uint64_t state_;
};

double log_sigmoid(double x) {
  // log(1 / (1 + e^-x)) without overflow.
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct Vocabulary {
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  std::unordered_map<std::string, std::uint32_t> index;
  std::uint64_t train_words = 0;
};

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& sentences,
                            std::size_t min_count) {
  std::unordered_map<std::string, std::uint64_t> raw;
  for (const auto& s : sentences) {
    for (const auto& tok : s) ++raw[tok];
  }
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [w, n] : raw) {
    if (n >= min_count) kept.emplace_back(w, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (auto& [w, n] : kept) {
    v.index.emplace(w, static_cast<std::uint32_t>(v.words.size()));
    v.words.push_back(w);
    v.counts.push_back(n);
    v.train_words += n;
  }
  return v;
}

// Cumulative unigram^0.75 distribution, sampled by binary search.
class NoiseDistribution {
 public:
  explicit NoiseDistribution(const std::vector<std::uint64_t>& counts) {
    cumulative_.reserve(counts.size());
    double total = 0.0;
    for (auto n : counts) {
      total += std::pow(static_cast<double>(n), 0.75);
      cumulative_.push_back(total);
    }
    for (auto& c : cumulative_) c /= total;
  }
  std::uint32_t sample(Lcg& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::uint32_t>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

struct Model {
  std::size_t dim;
  std::vector<float> input;   // embedding vectors
  std::vector<float> output;  // context-side weights
};

struct EpochTally {
  double loss = 0.0;
  std::uint64_t predictions = 0;
  std::uint64_t words = 0;
};

class CbowTrainer {
 public:
  CbowTrainer(const Vocabulary& vocab, const EmbeddingParams& params, Model& model)
      : vocab_(vocab), params_(params), model_(model), noise_(vocab.counts) {
    const double threshold = params.subsample_threshold * static_cast<double>(vocab.train_words);
    keep_prob_.resize(vocab.counts.size(), 1.0);
    if (params.subsample_threshold > 0.0) {
      for (std::size_t i = 0; i < vocab.counts.size(); ++i) {
        const double f = static_cast<double>(vocab.counts[i]);
        keep_prob_[i] = (std::sqrt(f / threshold) + 1.0) * threshold / f;
      }
    }
    total_steps_ = static_cast<double>(params.epochs) * static_cast<double>(vocab.train_words) + 1.0;
  }

  // Trains over sentences[begin, end) for one epoch. `words_before` is the
  // global count of words processed before this range, for the lr schedule.
  EpochTally run(const std::vector<std::vector<std::string>>& sentences, std::size_t begin,
                 std::size_t end, std::uint64_t words_before, Lcg& rng) const {
    EpochTally tally;
    const std::size_t dim = model_.dim;
    std::vector<float> hidden(dim), grad(dim);
    std::vector<std::uint32_t> ids;
    const double alpha0 = params_.initial_learning_rate;
    for (std::size_t s = begin; s < end; ++s) {
      ids.clear();
      for (const auto& tok : sentences[s]) {
        auto it = vocab_.index.find(tok);
        if (it == vocab_.index.end()) continue;
        ++tally.words;
        if (keep_prob_[it->second] < 1.0 && keep_prob_[it->second] < rng.uniform()) continue;
        ids.push_back(it->second);
      }
      const double progress = static_cast<double>(words_before + tally.words) / total_steps_;
      const double alpha = std::max(alpha0 * (1.0 - progress), alpha0 * 1e-4);
      const auto n = static_cast<std::ptrdiff_t>(ids.size());
      for (std::ptrdiff_t pos = 0; pos < n; ++pos) {
        const auto reduced = static_cast<std::ptrdiff_t>(rng.next() % params_.window);
        const std::ptrdiff_t span = static_cast<std::ptrdiff_t>(params_.window) - reduced;
        std::fill(hidden.begin(), hidden.end(), 0.0f);
        std::fill(grad.begin(), grad.end(), 0.0f);
        std::size_t context = 0;
        for (std::ptrdiff_t c = pos - span; c <= pos + span; ++c) {
          if (c == pos || c < 0 || c >= n) continue;
          const float* v = &model_.input[ids[c] * dim];
          for (std::size_t i = 0; i < dim; ++i) hidden[i] += v[i];
          ++context;
        }
        if (context == 0) continue;
        const float inv = 1.0f / static_cast<float>(context);
        for (auto& h : hidden) h *= inv;

        const std::uint32_t center = ids[pos];
        for (std::size_t d = 0; d <= params_.negative_samples; ++d) {
          std::uint32_t word;
          double label;
          if (d == 0) {
            word = center;
            label = 1.0;
          } else {
            word = noise_.sample(rng);
            if (word == center) continue;
            label = 0.0;
          }
          float* out = &model_.output[word * dim];
          double f = 0.0;
          for (std::size_t i = 0; i < dim; ++i) f += static_cast<double>(hidden[i]) * out[i];
          tally.loss -= label > 0.0 ? log_sigmoid(f) : log_sigmoid(-f);
          const auto g = static_cast<float>((label - sigmoid(f)) * alpha);
          for (std::size_t i = 0; i < dim; ++i) grad[i] += g * out[i];
          for (std::size_t i = 0; i < dim; ++i) out[i] += g * hidden[i];
        }
        ++tally.predictions;
        for (std::ptrdiff_t c = pos - span; c <= pos + span; ++c) {
          if (c == pos || c < 0 || c >= n) continue;
          float* v = &model_.input[ids[c] * dim];
          for (std::size_t i = 0; i < dim; ++i) v[i] += grad[i];
        }
      }
    }
    return tally;
  }

 private:
  const Vocabulary& vocab_;
  const EmbeddingParams& params_;
  Model& model_;
  NoiseDistribution noise_;
  std::vector<double> keep_prob_;
  double total_steps_ = 1.0;
};

}  // namespace

TrainingResult train_cbow(const std::vector<std::vector<std::string>>& sentences,
                          const EmbeddingParams& params) {
  params.validate();
  const Vocabulary vocab = build_vocabulary(sentences, params.min_count);
  if (vocab.words.empty()) {
    throw Error(ErrorCode::kTraining, "vocabulary is empty after applying min_count=" +
                                          std::to_string(params.min_count));
  }
  if (vocab.words.size() < 2) {
    throw Error(ErrorCode::kTraining,
                "vocabulary has a single word type after min_count; need at least two");
  }

  const std::size_t dim = params.dimension;
  Model model{dim, std::vector<float>(vocab.words.size() * dim),
              std::vector<float>(vocab.words.size() * dim, 0.0f)};
  Lcg init(params.seed);
  for (auto& v : model.input) {
    v = static_cast<float>((init.uniform() - 0.5) / static_cast<double>(dim));
  }

  CbowTrainer trainer(vocab, params, model);
  TrainingResult result;
  result.train_words = vocab.train_words;
  const unsigned workers = std::min<unsigned>(
      params.workers, static_cast<unsigned>(std::max<std::size_t>(1, sentences.size())));

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    const std::uint64_t words_before = epoch * vocab.train_words;
    EpochTally total;
    if (workers == 1) {
      Lcg rng(params.seed * 1000003ULL + epoch + 1);
      total = trainer.run(sentences, 0, sentences.size(), words_before, rng);
    } else {
      std::vector<EpochTally> tallies(workers);
      std::vector<std::jthread> pool;
      const std::size_t chunk = (sentences.size() + workers - 1) / workers;
      for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(sentences.size(), w * chunk);
        const std::size_t end = std::min(sentences.size(), begin + chunk);
        pool.emplace_back([&, w, begin, end] {
          Lcg rng(params.seed * 1000003ULL + epoch * workers + w + 1);
          // Approximate schedule: each worker advances its own share.
          tallies[w] = trainer.run(sentences, begin, end, words_before, rng);
        });
      }
      pool.clear();
      for (const auto& t : tallies) {
        total.loss += t.loss;
        total.predictions += t.predictions;
        total.words += t.words;
      }
    }
    result.epoch_losses.push_back(total.predictions ? total.loss / total.predictions : 0.0);
  }

  result.store = VectorStore(dim);
  for (std::size_t w = 0; w < vocab.words.size(); ++w) {
    std::span<const float> v(&model.input[w * dim], dim);
    result.store.add(vocab.words[w], v);
    if (result.store.norm(w) == 0.0) {
      throw Error(ErrorCode::kTraining, "training produced a zero vector for \"" + vocab.words[w] + "\"");
    }
  }
  result.store.set_params_fingerprint(params.fingerprint());
  return result;
}

VectorStore parse_vectors(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kFormat, source_name + ":" + std::to_string(line_no) + ": " + what);
  };
  if (!std::getline(in, line)) {
    line_no = 1;
    fail("missing \"vocab_size dimension\" header");
  }
  line_no = 1;
  std::size_t vocab_size = 0, dim = 0;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> vocab_size >> dim) || (header >> extra) || dim == 0) {
      fail("malformed header, expected \"vocab_size dimension\"");
    }
  }
  VectorStore store(dim);
  std::vector<float> values(dim);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end && *p == ' ') ++p;
    const char* tok_end = p;
    while (tok_end < end && *tok_end != ' ') ++tok_end;
    std::string token(p, tok_end);
    p = tok_end;
    std::size_t n = 0;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      if (n == dim) fail("more than " + std::to_string(dim) + " components");
      auto [next, ec] = std::from_chars(p, end, values[n]);
      if (ec != std::errc() || (next < end && *next != ' ')) fail("malformed component");
      ++n;
      p = next;
    }
    if (n != dim) {
      fail("expected " + std::to_string(dim) + " components, found " + std::to_string(n));
    }
    try {
      store.add(token, values);
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  if (store.size() != vocab_size) {
    throw Error(ErrorCode::kFormat, source_name + ": header declares " + std::to_string(vocab_size) +
                                        " vectors, found " + std::to_string(store.size()));
  }
  return store;
}

VectorStore load_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open vectors file: " + path);
  return parse_vectors(in, path);
}

void write_vectors(const VectorStore& store, std::ostream& out) {
  out << store.size() << ' ' << store.dimension() << '\n';
  char buf[64];
  for (std::size_t row = 0; row < store.size(); ++row) {
    out << store.vocabulary()[row];
    for (float v : store.vector(row)) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    out << '\n';
  }
}

void save_vectors(const VectorStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write vectors file: " + path);
  write_vectors(store, out);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace hatewatch
