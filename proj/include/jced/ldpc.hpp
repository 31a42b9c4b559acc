#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace jced {

// LLR convention, fixed repo-wide: llr = log Pr{bit=0} / Pr{bit=1};
// positive means bit 0. All message/LLR values are clamped to [-30, 30].
constexpr double kLlrClamp = 30.0;

struct LdpcCode {
    int n = 0;  // codeword length
    int k = 0;  // info length
    std::vector<std::vector<int>> check_to_var;  // per check: variable indices
    std::vector<std::vector<int>> var_to_check;  // per variable: check indices

    // Encoder: info bits go to the non-pivot columns of the reduced parity
    // matrix; each reduced row determines one parity (pivot) bit.
    std::vector<int> info_positions;    // size k
    std::vector<int> pivot_positions;   // size n-k, pivot of reduced row r
    std::vector<std::vector<std::uint64_t>> reduced_rows;  // bitsets over n

    double rate() const { return double(k) / double(n); }
    bool syndrome_ok(std::span<const std::uint8_t> codeword) const;
};

// PEG-style construction: irregular column weights (2/3/6 mix, average 3),
// each new edge attached to the farthest reachable check set, lowest degree
// first. Retries with perturbed seeds until the parity matrix has full row
// rank; throws after too many attempts.
LdpcCode generate_code(int n, double rate, std::uint64_t seed);

std::vector<std::uint8_t> encode(const LdpcCode& code, std::span<const std::uint8_t> info);

struct SisoResult {
    std::vector<double> extrinsic;  // posterior = prior + extrinsic, per bit
    std::vector<double> posterior;
    bool converged = false;  // hard decisions satisfy every check
    int iters = 0;
};

// Sum-product decoding with early stop once the hard decisions satisfy all
// checks. prior_llr values are clamped on entry.
SisoResult siso_decode(const LdpcCode& code, std::span<const double> prior_llr, int max_iters);

// Plain text adjacency: one check row per line, space-separated column
// indices. n is not stored in the file and must be supplied on load.
void save_parity(const std::string& path, const LdpcCode& code);
LdpcCode load_parity(const std::string& path, int n);

}  // namespace jced
