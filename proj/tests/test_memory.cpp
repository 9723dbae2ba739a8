#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "pderl/checkpoint.hpp"
#include "pderl/memory.hpp"
#include "pderl/rng.hpp"

using namespace pderl;

namespace {

// Transitions tagged by a scalar id so sets of them can be compared easily.
Transition tagged(double id) {
    Transition t;
    t.state = Vector::Constant(2, id);
    t.action = Vector::Constant(1, -id);
    t.reward = id;
    t.next_state = Vector::Constant(2, id + 0.5);
    t.done = std::fmod(id, 2.0) == 0.0;
    return t;
}

std::vector<double> tags_of(const TransitionRing& ring) {
    std::vector<double> tags;
    for (std::size_t i = 0; i < ring.size(); ++i) tags.push_back(ring[i].reward);
    return tags;
}

// Independent model of the crossover inheritance rule: the newest
// min(|x|, kappa/2) entries of x followed by the newest min(|y|, kappa/2)
// entries of y, order ignored.
std::vector<double> expected_inherited_tags(const std::vector<double>& x,
                                            const std::vector<double>& y, std::size_t kappa) {
    std::vector<double> expected;
    const std::size_t half = kappa / 2;
    const std::size_t from_x = std::min(x.size(), half);
    const std::size_t from_y = std::min(y.size(), half);
    expected.insert(expected.end(), x.end() - static_cast<long>(from_x), x.end());
    expected.insert(expected.end(), y.end() - static_cast<long>(from_y), y.end());
    return expected;
}

GeneticMemory filled(std::size_t capacity, const std::vector<double>& tags) {
    GeneticMemory memory(capacity);
    for (double tag : tags) memory.push(tagged(tag));
    return memory;
}

}  // namespace

TEST_SUITE("memory") {

TEST_CASE("a two-slot ring keeps only the newest two entries") {
    TransitionRing ring(2);
    ring.push(tagged(1.0));
    ring.push(tagged(2.0));
    ring.push(tagged(3.0));
    CHECK(ring.size() == 2);
    CHECK(ring.capacity() == 2);
    CHECK(ring.insertion_count() == 3);
    CHECK(ring[0].reward == 2.0);
    CHECK(ring[1].reward == 3.0);
}

TEST_CASE("default capacities match the configured stores") {
    CHECK(GeneticMemory{}.capacity() == 8000);
    CHECK(SharedReplayBuffer{}.capacity() == 1000000);
}

TEST_CASE("a ring below capacity holds everything in insertion order") {
    TransitionRing ring(10);
    for (int i = 0; i < 7; ++i) ring.push(tagged(static_cast<double>(i)));
    CHECK(ring.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) CHECK(ring[i].reward == static_cast<double>(i));
}

TEST_CASE("ring contents track a reference deque across random workloads") {
    Rng rng = make_rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t capacity =
            1 + static_cast<std::size_t>(uniform_real(rng, 0.0, 12.0));
        TransitionRing ring(capacity);
        std::vector<double> model;
        const int pushes = static_cast<int>(uniform_real(rng, 0.0, 40.0));
        for (int i = 0; i < pushes; ++i) {
            const double tag = uniform_real(rng, -10.0, 10.0);
            ring.push(tagged(tag));
            model.push_back(tag);
            if (model.size() > capacity) model.erase(model.begin());
        }
        CHECK(tags_of(ring) == model);
    }
}

TEST_CASE("zero capacity is rejected") {
    CHECK_THROWS_AS(TransitionRing(0), std::invalid_argument);
}

TEST_CASE("sampling from an empty ring throws") {
    TransitionRing ring(4);
    Rng rng = make_rng(1);
    CHECK_THROWS_AS(ring.sample_states(rng, 1), std::logic_error);
    CHECK_THROWS_AS(ring.sample_transitions(rng, 1), std::logic_error);
}

TEST_CASE("sampling a single-entry ring repeats that entry") {
    TransitionRing ring(4);
    ring.push(tagged(7.0));
    Rng rng = make_rng(2);
    const Matrix states = ring.sample_states(rng, 3);
    REQUIRE(states.cols() == 3);
    for (int c = 0; c < 3; ++c) CHECK(states(0, c) == 7.0);
}

TEST_CASE("sampling is deterministic per seed") {
    TransitionRing ring(50);
    for (int i = 0; i < 50; ++i) ring.push(tagged(static_cast<double>(i)));
    Rng a = make_rng(33);
    Rng b = make_rng(33);
    CHECK(ring.sample_states(a, 20) == ring.sample_states(b, 20));
}

TEST_CASE("uniform sampling covers all entries within 3 sigma") {
    TransitionRing ring(20);
    for (int i = 0; i < 20; ++i) ring.push(tagged(static_cast<double>(i)));
    Rng rng = make_rng(7);
    const int draws = 100000;
    std::vector<int> counts(20, 0);
    const auto sampled = ring.sample_transitions(rng, draws);
    for (const auto& t : sampled) counts[static_cast<std::size_t>(t.reward)]++;
    const double expected = draws / 20.0;
    const double sigma = std::sqrt(draws * (1.0 / 20.0) * (19.0 / 20.0));
    for (int c : counts) CHECK(std::abs(c - expected) <= 3.0 * sigma);
}

TEST_CASE("sample_batch draws the same entries as sample_transitions") {
    TransitionRing ring(30);
    for (int i = 0; i < 30; ++i) ring.push(tagged(static_cast<double>(i)));
    Rng a = make_rng(88);
    Rng b = make_rng(88);
    const auto listed = ring.sample_transitions(a, 12);

    Matrix states, actions, next_states;
    Eigen::RowVectorXd rewards, not_done;
    ring.sample_batch(b, 12, states, actions, rewards, next_states, not_done);
    REQUIRE(states.cols() == 12);
    for (int i = 0; i < 12; ++i) {
        const auto& t = listed[static_cast<std::size_t>(i)];
        CHECK((states.col(i) - t.state).cwiseAbs().maxCoeff() == 0.0);
        CHECK((actions.col(i) - t.action).cwiseAbs().maxCoeff() == 0.0);
        CHECK((next_states.col(i) - t.next_state).cwiseAbs().maxCoeff() == 0.0);
        CHECK(rewards[i] == t.reward);
        CHECK(not_done[i] == (t.done ? 0.0 : 1.0));
    }
}

TEST_CASE("full inheritance copies everything and stays isolated") {
    GeneticMemory parent = filled(5, {1.0, 2.0, 3.0});
    GeneticMemory child = inherit_full(parent);
    CHECK(child.capacity() == parent.capacity());
    CHECK(tags_of(child) == std::vector<double>{1.0, 2.0, 3.0});

    parent.push(tagged(4.0));
    CHECK(child.size() == 3);  // child unaffected by later parent pushes
    child.push(tagged(9.0));
    CHECK(parent.size() == 4);
    CHECK(parent[3].reward == 4.0);
}

TEST_CASE("full inheritance at capacity keeps the retained window") {
    GeneticMemory parent = filled(3, {1.0, 2.0, 3.0, 4.0, 5.0});
    GeneticMemory child = inherit_full(parent);
    CHECK(tags_of(child) == std::vector<double>{3.0, 4.0, 5.0});
}

TEST_CASE("crossover inheritance takes the newest half from each parent") {
    GeneticMemory x = filled(10, {1.0, 2.0, 3.0, 4.0, 5.0});
    GeneticMemory y = filled(10, {11.0, 12.0, 13.0, 14.0, 15.0});
    Rng rng = make_rng(5);
    GeneticMemory child = inherit_crossover(x, y, 4, rng);
    CHECK(child.capacity() == 4);
    auto tags = tags_of(child);
    std::sort(tags.begin(), tags.end());
    CHECK(tags == std::vector<double>{4.0, 5.0, 14.0, 15.0});
}

TEST_CASE("crossover inheritance handles short and empty parents") {
    Rng rng = make_rng(6);

    GeneticMemory x = filled(10, {1.0});
    GeneticMemory y = filled(10, {11.0, 12.0, 13.0, 14.0, 15.0, 16.0});
    GeneticMemory child = inherit_crossover(x, y, 8, rng);
    auto tags = tags_of(child);
    std::sort(tags.begin(), tags.end());
    CHECK(tags == std::vector<double>{1.0, 13.0, 14.0, 15.0, 16.0});

    GeneticMemory empty_parent(10);
    GeneticMemory only_y = inherit_crossover(empty_parent, y, 8, rng);
    tags = tags_of(only_y);
    std::sort(tags.begin(), tags.end());
    CHECK(tags == std::vector<double>{13.0, 14.0, 15.0, 16.0});

    GeneticMemory none = inherit_crossover(empty_parent, empty_parent, 8, rng);
    CHECK(none.empty());
    CHECK(none.capacity() == 8);
}

TEST_CASE("crossover inheritance matches the reference rule across cases") {
    Rng rng = make_rng(909);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t nx = static_cast<std::size_t>(uniform_real(rng, 0.0, 13.0));
        const std::size_t ny = static_cast<std::size_t>(uniform_real(rng, 0.0, 13.0));
        const std::size_t kappa = 2 + static_cast<std::size_t>(uniform_real(rng, 0.0, 15.0));
        std::vector<double> x_tags, y_tags;
        for (std::size_t i = 0; i < nx; ++i) x_tags.push_back(static_cast<double>(i));
        for (std::size_t i = 0; i < ny; ++i) y_tags.push_back(100.0 + static_cast<double>(i));

        GeneticMemory x = filled(std::max<std::size_t>(nx, 1), x_tags);
        GeneticMemory y = filled(std::max<std::size_t>(ny, 1), y_tags);
        GeneticMemory child = inherit_crossover(x, y, kappa, rng);

        auto got = tags_of(child);
        auto expected = expected_inherited_tags(x_tags, y_tags, kappa);
        std::sort(got.begin(), got.end());
        std::sort(expected.begin(), expected.end());
        CHECK(got == expected);
        CHECK(child.size() <= kappa);
    }
}

TEST_CASE("crossover inheritance contents do not depend on the shuffle seed") {
    GeneticMemory x = filled(10, {1.0, 2.0, 3.0, 4.0});
    GeneticMemory y = filled(10, {5.0, 6.0, 7.0});
    Rng a = make_rng(1);
    Rng b = make_rng(999);
    auto tags_a = tags_of(inherit_crossover(x, y, 6, a));
    auto tags_b = tags_of(inherit_crossover(x, y, 6, b));
    std::sort(tags_a.begin(), tags_a.end());
    std::sort(tags_b.begin(), tags_b.end());
    CHECK(tags_a == tags_b);
}

TEST_CASE("memory dumps round trip exactly") {
    GeneticMemory memory(6);
    Rng rng = make_rng(2718);
    for (int i = 0; i < 5; ++i) {
        Transition t;
        t.state = Vector::NullaryExpr(3, [&](Eigen::Index) { return uniform_real(rng, -2, 2); });
        t.action = Vector::NullaryExpr(2, [&](Eigen::Index) { return uniform_real(rng, -1, 1); });
        t.reward = uniform_real(rng, -5.0, 5.0);
        t.next_state =
            Vector::NullaryExpr(3, [&](Eigen::Index) { return uniform_real(rng, -2, 2); });
        t.done = i == 4;
        memory.push(std::move(t));
    }
    const auto path = std::filesystem::temp_directory_path() / "pderl_memory_roundtrip.mem";
    save_memory(path.string(), memory);
    GeneticMemory loaded = load_memory(path.string());
    std::filesystem::remove(path);

    CHECK(loaded.capacity() == memory.capacity());
    REQUIRE(loaded.size() == memory.size());
    for (std::size_t i = 0; i < memory.size(); ++i) {
        CHECK((loaded[i].state - memory[i].state).cwiseAbs().maxCoeff() == 0.0);
        CHECK((loaded[i].action - memory[i].action).cwiseAbs().maxCoeff() == 0.0);
        CHECK(loaded[i].reward == memory[i].reward);
        CHECK((loaded[i].next_state - memory[i].next_state).cwiseAbs().maxCoeff() == 0.0);
        CHECK(loaded[i].done == memory[i].done);
    }
}

}  // TEST_SUITE
