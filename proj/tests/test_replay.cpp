#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "satnoma/replay_buffer.hpp"

using satnoma::ReplayBuffer;
using satnoma::Rng;
using satnoma::Transition;

namespace {

Transition tagged(double tag) {
  Transition t;
  t.obs = {tag};
  t.actions = {tag};
  t.rewards = {tag};
  t.next_obs = {tag};
  return t;
}

std::multiset<double> stored_tags(const ReplayBuffer& buf) {
  std::multiset<double> tags;
  for (std::size_t i = 0; i < buf.size(); ++i) tags.insert(buf.at(i).rewards[0]);
  return tags;
}

}  // namespace

TEST_CASE("eviction drops the oldest transition first") {
  ReplayBuffer buf(2);
  buf.push(tagged(1));
  buf.push(tagged(2));
  buf.push(tagged(3));
  REQUIRE(buf.size() == 2);
  REQUIRE(stored_tags(buf) == std::multiset<double>{2, 3});

  buf.push(tagged(4));
  REQUIRE(stored_tags(buf) == std::multiset<double>{3, 4});
}

TEST_CASE("size never exceeds capacity") {
  ReplayBuffer buf(5);
  for (int i = 0; i < 37; ++i) {
    buf.push(tagged(i));
    REQUIRE(buf.size() <= 5u);
  }
  REQUIRE(stored_tags(buf) == std::multiset<double>{32, 33, 34, 35, 36});
}

TEST_CASE("a full-size sample is a permutation of the buffer") {
  ReplayBuffer buf(8);
  for (int i = 0; i < 8; ++i) buf.push(tagged(i));
  Rng rng(4);
  const auto batch = buf.sample(8, rng);
  std::multiset<double> seen;
  for (const Transition* t : batch) seen.insert(t->rewards[0]);
  REQUIRE(seen == std::multiset<double>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("samples contain distinct transitions") {
  ReplayBuffer buf(100);
  for (int i = 0; i < 100; ++i) buf.push(tagged(i));
  Rng rng(6);
  for (int round = 0; round < 200; ++round) {
    const auto batch = buf.sample(10, rng);
    std::set<const Transition*> uniq(batch.begin(), batch.end());
    REQUIRE(uniq.size() == batch.size());
  }
}

TEST_CASE("a seeded sampler reproduces its minibatch") {
  ReplayBuffer buf(50);
  for (int i = 0; i < 50; ++i) buf.push(tagged(i));
  Rng ra(9), rb(9);
  const auto batch_a = buf.sample(10, ra);
  const auto batch_b = buf.sample(10, rb);
  REQUIRE(batch_a == batch_b);  // identical pointers in identical order
}

TEST_CASE("sampling is roughly uniform over the stored transitions") {
  ReplayBuffer buf(20);
  for (int i = 0; i < 20; ++i) buf.push(tagged(i));
  Rng rng(12);
  std::vector<int> count(20, 0);
  const int rounds = 20000;
  for (int r = 0; r < rounds; ++r)
    for (const Transition* t : buf.sample(5, rng))
      ++count[static_cast<int>(t->rewards[0])];
  // every item expects rounds * 5/20 = 5000 picks
  for (int c : count) {
    REQUIRE(c > 4700);
    REQUIRE(c < 5300);
  }
}

TEST_CASE("invalid construction and oversampling are rejected") {
  REQUIRE_THROWS_AS(ReplayBuffer(0), std::invalid_argument);
  ReplayBuffer buf(4);
  buf.push(tagged(1));
  Rng rng(1);
  REQUIRE_THROWS_AS(buf.sample(2, rng), std::invalid_argument);
  REQUIRE_NOTHROW(buf.sample(1, rng));
}
