#include "jced/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "jced/rng.hpp"

namespace jced {

namespace {

double clamp_llr(double v) { return std::clamp(v, -kLlrClamp, kLlrClamp); }

// Column-weight profile with average exactly 3: mix of weights 2, 3 and 6.
std::vector<int> column_weights(int n, Rng& rng) {
    int n2 = static_cast<int>(std::lround(0.3 * n));
    int n6 = static_cast<int>(std::lround(0.1 * n));
    int n3 = n - n2 - n6;
    int edges = 2 * n2 + 3 * n3 + 6 * n6;
    while (edges != 3 * n) {  // trade degree-2 against degree-3 columns
        if (edges < 3 * n && n2 > 0) {
            --n2;
            ++n3;
            ++edges;
        } else if (edges > 3 * n && n3 > 0) {
            --n3;
            ++n2;
            --edges;
        } else {
            break;
        }
    }
    std::vector<int> w;
    w.insert(w.end(), n2, 2);
    w.insert(w.end(), n3, 3);
    w.insert(w.end(), n6, 6);
    std::shuffle(w.begin(), w.end(), rng);
    return w;
}

// Progressive edge growth: BFS from variable v over the current graph; among
// the checks at maximal distance (or unreachable), pick one with the lowest
// degree.
struct PegBuilder {
    int n, m;
    std::vector<std::vector<int>> var_checks, check_vars;
    std::vector<int> dist;  // scratch: distance from current variable, -1 unreached

    PegBuilder(int n_, int m_) : n(n_), m(m_), var_checks(n_), check_vars(m_), dist(m_) {}

    void bfs(int v) {
        std::fill(dist.begin(), dist.end(), -1);
        std::deque<std::pair<int, int>> frontier;  // (check, depth)
        for (int c : var_checks[v]) {
            dist[c] = 0;
            frontier.emplace_back(c, 0);
        }
        std::vector<std::uint8_t> var_seen(n, 0);
        var_seen[v] = 1;
        while (!frontier.empty()) {
            const auto [c, d] = frontier.front();
            frontier.pop_front();
            for (int v2 : check_vars[c]) {
                if (var_seen[v2]) continue;
                var_seen[v2] = 1;
                for (int c2 : var_to_check_of(v2)) {
                    if (dist[c2] >= 0) continue;
                    dist[c2] = d + 1;
                    frontier.emplace_back(c2, d + 1);
                }
            }
        }
    }

    const std::vector<int>& var_to_check_of(int v) const { return var_checks[v]; }

    // Candidates ranked by (distance from v, descending; unreachable first),
    // then by current check degree; ties broken uniformly at random.
    int pick_check(int v, Rng& rng, bool first_edge) {
        std::vector<int> cand;
        if (first_edge) {
            cand.resize(m);
            std::iota(cand.begin(), cand.end(), 0);
        } else {
            bfs(v);
            int best_rank = -1;
            for (int c = 0; c < m; ++c) {
                if (dist[c] == 0) continue;  // already a neighbour
                const int rank = dist[c] < 0 ? std::numeric_limits<int>::max() : dist[c];
                if (rank > best_rank) {
                    best_rank = rank;
                    cand.clear();
                }
                if (rank == best_rank) cand.push_back(c);
            }
            if (cand.empty()) return -1;
        }
        std::size_t min_deg = std::numeric_limits<std::size_t>::max();
        for (int c : cand) min_deg = std::min(min_deg, check_vars[c].size());
        std::vector<int> lightest;
        for (int c : cand)
            if (check_vars[c].size() == min_deg) lightest.push_back(c);
        std::uniform_int_distribution<std::size_t> pick(0, lightest.size() - 1);
        return lightest[pick(rng)];
    }

    void add_edge(int v, int c) {
        var_checks[v].push_back(c);
        check_vars[c].push_back(v);
    }
};

// GF(2) row reduction with column pivoting; fills the encoder structures.
// Returns false when the parity matrix is rank deficient.
bool build_encoder(LdpcCode& code) {
    const int m = static_cast<int>(code.check_to_var.size());
    const int n = code.n;
    const int words = (n + 63) / 64;
    std::vector<std::vector<std::uint64_t>> rows(m, std::vector<std::uint64_t>(words, 0));
    for (int r = 0; r < m; ++r)
        for (int v : code.check_to_var[r]) rows[r][v >> 6] ^= 1ULL << (v & 63);

    std::vector<int> pivot_of_row(m, -1);
    std::vector<std::uint8_t> is_pivot_col(n, 0);
    int rank = 0;
    for (int col = 0; col < n && rank < m; ++col) {
        int sel = -1;
        for (int r = rank; r < m; ++r)
            if ((rows[r][col >> 6] >> (col & 63)) & 1) {
                sel = r;
                break;
            }
        if (sel < 0) continue;
        std::swap(rows[sel], rows[rank]);
        for (int r = 0; r < m; ++r) {
            if (r == rank) continue;
            if ((rows[r][col >> 6] >> (col & 63)) & 1)
                for (int w = 0; w < words; ++w) rows[r][w] ^= rows[rank][w];
        }
        pivot_of_row[rank] = col;
        is_pivot_col[col] = 1;
        ++rank;
    }
    if (rank != m) return false;

    code.reduced_rows = std::move(rows);
    code.pivot_positions.assign(pivot_of_row.begin(), pivot_of_row.end());
    code.info_positions.clear();
    for (int col = 0; col < n; ++col)
        if (!is_pivot_col[col]) code.info_positions.push_back(col);
    return static_cast<int>(code.info_positions.size()) == code.k;
}

void build_adjacency(LdpcCode& code) {
    code.var_to_check.assign(code.n, {});
    for (int c = 0; c < static_cast<int>(code.check_to_var.size()); ++c)
        for (int v : code.check_to_var[c]) code.var_to_check[v].push_back(c);
}

}  // namespace

bool LdpcCode::syndrome_ok(std::span<const std::uint8_t> codeword) const {
    for (const auto& row : check_to_var) {
        int parity = 0;
        for (int v : row) parity ^= codeword[v];
        if (parity) return false;
    }
    return true;
}

LdpcCode generate_code(int n, double rate, std::uint64_t seed) {
    if (n < 4 || rate <= 0.0 || rate >= 1.0)
        throw std::invalid_argument("ldpc: need n >= 4 and 0 < R < 1");
    const int k = static_cast<int>(std::lround(n * rate));
    if (std::abs(n * rate - k) > 1e-6)
        throw std::invalid_argument("ldpc: n*R must be an integer");
    const int m = n - k;
    if (m < 2) throw std::invalid_argument("ldpc: too few checks");

    for (int attempt = 0; attempt < 50; ++attempt) {
        Rng rng(derive_seed(seed, 0x1dbc, attempt));
        auto weights = column_weights(n, rng);

        PegBuilder peg(n, m);
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return weights[a] < weights[b]; });
        for (int v : order)
            for (int e = 0; e < weights[v]; ++e) {
                const int c = peg.pick_check(v, rng, e == 0 && peg.var_checks[v].empty());
                if (c < 0) throw std::runtime_error("ldpc: PEG could not place an edge");
                peg.add_edge(v, c);
            }

        LdpcCode code;
        code.n = n;
        code.k = k;
        code.check_to_var = peg.check_vars;
        for (auto& row : code.check_to_var) std::sort(row.begin(), row.end());
        if (!build_encoder(code)) continue;  // rank deficient; retry
        build_adjacency(code);
        return code;
    }
    throw std::runtime_error("ldpc: construction failed (rank deficient after retries)");
}

std::vector<std::uint8_t> encode(const LdpcCode& code, std::span<const std::uint8_t> info) {
    if (static_cast<int>(info.size()) != code.k)
        throw std::invalid_argument("ldpc encode: info length != k");
    const int words = (code.n + 63) / 64;
    std::vector<std::uint64_t> c(words, 0);
    for (int i = 0; i < code.k; ++i)
        if (info[i]) c[code.info_positions[i] >> 6] ^= 1ULL << (code.info_positions[i] & 63);

    // Reduced rows contain exactly one pivot column each; the parity bit is
    // the XOR of the info bits selected by the row.
    for (std::size_t r = 0; r < code.reduced_rows.size(); ++r) {
        int parity = 0;
        for (int w = 0; w < words; ++w)
            parity ^= __builtin_popcountll(code.reduced_rows[r][w] & c[w]) & 1;
        if (parity) c[code.pivot_positions[r] >> 6] ^= 1ULL << (code.pivot_positions[r] & 63);
    }

    std::vector<std::uint8_t> out(code.n);
    for (int v = 0; v < code.n; ++v) out[v] = (c[v >> 6] >> (v & 63)) & 1;
    return out;
}

SisoResult siso_decode(const LdpcCode& code, std::span<const double> prior_llr, int max_iters) {
    if (static_cast<int>(prior_llr.size()) != code.n)
        throw std::invalid_argument("ldpc decode: prior length != n");
    const int n = code.n;
    const int m = static_cast<int>(code.check_to_var.size());

    std::vector<double> prior(n);
    for (int v = 0; v < n; ++v) {
        if (!std::isfinite(prior_llr[v])) throw std::invalid_argument("ldpc decode: non-finite LLR");
        prior[v] = clamp_llr(prior_llr[v]);
    }

    // Edge storage parallel to check_to_var.
    std::vector<std::vector<double>> r_msg(m);  // check -> var
    for (int c = 0; c < m; ++c) r_msg[c].assign(code.check_to_var[c].size(), 0.0);

    std::vector<double> ext(n, 0.0);
    std::vector<std::uint8_t> hard(n);
    auto harden = [&]() {
        for (int v = 0; v < n; ++v) hard[v] = (prior[v] + ext[v]) < 0.0 ? 1 : 0;
    };

    auto check_pass = [&]() {
        for (int c = 0; c < m; ++c) {
            const auto& vars = code.check_to_var[c];
            const std::size_t deg = vars.size();
            static thread_local std::vector<double> t, pre, suf;
            t.resize(deg);
            pre.resize(deg + 1);
            suf.resize(deg + 1);
            for (std::size_t e = 0; e < deg; ++e) {
                const int v = vars[e];
                const double q = clamp_llr(prior[v] + ext[v] - r_msg[c][e]);
                t[e] = std::tanh(0.5 * q);
            }
            pre[0] = 1.0;
            for (std::size_t e = 0; e < deg; ++e) pre[e + 1] = pre[e] * t[e];
            suf[deg] = 1.0;
            for (std::size_t e = deg; e-- > 0;) suf[e] = suf[e + 1] * t[e];
            for (std::size_t e = 0; e < deg; ++e) {
                const double prod = std::clamp(pre[e] * suf[e + 1], -0.999999999999, 0.999999999999);
                r_msg[c][e] = clamp_llr(2.0 * std::atanh(prod));
            }
        }
        // variable update: ext_v = sum of incoming check messages
        std::fill(ext.begin(), ext.end(), 0.0);
        for (int c = 0; c < m; ++c)
            for (std::size_t e = 0; e < code.check_to_var[c].size(); ++e)
                ext[code.check_to_var[c][e]] += r_msg[c][e];
        for (int v = 0; v < n; ++v) ext[v] = clamp_llr(ext[v]);
    };

    SisoResult res;
    harden();
    if (code.syndrome_ok(hard)) {
        // Already a codeword; one check pass still yields meaningful extrinsic.
        check_pass();
        res.converged = true;
        res.iters = 0;
    } else {
        for (int it = 1; it <= max_iters; ++it) {
            check_pass();
            res.iters = it;
            harden();
            if (code.syndrome_ok(hard)) {
                res.converged = true;
                break;
            }
        }
    }

    res.extrinsic = std::move(ext);
    res.posterior.resize(n);
    for (int v = 0; v < n; ++v) res.posterior[v] = prior[v] + res.extrinsic[v];
    return res;
}

void save_parity(const std::string& path, const LdpcCode& code) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("ldpc: cannot open " + path);
    for (const auto& row : code.check_to_var) {
        for (std::size_t i = 0; i < row.size(); ++i) out << row[i] << (i + 1 < row.size() ? ' ' : '\n');
        if (row.empty()) out << '\n';
    }
    if (!out) throw std::runtime_error("ldpc: write failed for " + path);
}

LdpcCode load_parity(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ldpc: cannot open " + path);
    LdpcCode code;
    code.n = n;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::vector<int> vars;
        int v;
        while (row >> v) {
            if (v < 0 || v >= n) throw std::runtime_error("ldpc: column index out of range");
            vars.push_back(v);
        }
        std::sort(vars.begin(), vars.end());
        code.check_to_var.push_back(std::move(vars));
    }
    code.k = n - static_cast<int>(code.check_to_var.size());
    if (code.k <= 0) throw std::runtime_error("ldpc: too many checks in " + path);
    if (!build_encoder(code)) throw std::runtime_error("ldpc: loaded matrix is rank deficient");
    build_adjacency(code);
    return code;
}

}  // namespace jced
