#include "uar/random.hpp"

#include <bit>
#include <cmath>

namespace uar {

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t tag_of(double value) { return mix64(std::bit_cast<std::uint64_t>(value)); }

namespace {

std::mt19937_64 seeded_engine(const std::vector<std::uint64_t>& key) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  std::vector<std::uint32_t> words;
  words.reserve(2 * key.size() + 2);
  for (auto k : key) {
    h = mix64(h ^ k);
    words.push_back(static_cast<std::uint32_t>(h));
    words.push_back(static_cast<std::uint32_t>(h >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : RandomStream(std::vector<std::uint64_t>{seed}) {}

RandomStream::RandomStream(std::vector<std::uint64_t> key)
    : key_(std::move(key)), engine_(seeded_engine(key_)) {}

RandomStream RandomStream::derive(std::uint64_t tag) const {
  auto key = key_;
  key.push_back(tag);
  return RandomStream(std::move(key));
}

RandomStream RandomStream::derive(std::initializer_list<std::uint64_t> tags) const {
  auto key = key_;
  key.insert(key.end(), tags.begin(), tags.end());
  return RandomStream(std::move(key));
}

double RandomStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RandomStream::uniform_open() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::exponential() { return -std::log(uniform_open()); }

double RandomStream::normal() { return normal_(engine_); }

int RandomStream::sign() { return (engine_() >> 63) != 0 ? 1 : -1; }

std::size_t RandomStream::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace uar
