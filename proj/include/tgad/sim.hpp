#pragma once

#include <cstdint>
#include <vector>

#include "tgad/ingest.hpp"

namespace tgad {

// Toy AIS corpus: ships follow a handful of shipping lanes with smooth
// speed/course drift plus small noise, positions integrated with the same
// flat-earth step the verifier uses. Substitutes for real data in tests,
// the acceptance suite, and the CLI demo.
struct SimConfig {
    int n_tracks = 50;
    std::uint64_t seed = 7;
    int min_len_h = 24;
    int max_len_h = 48;
    double convoy_prob = 0.35; // chance a track sails alongside the previous one
};

std::vector<Track> simulate_tracks(const SimConfig& cfg);

} // namespace tgad
