#pragma once

#include <cstdint>
#include <vector>

namespace surfmem {

inline constexpr int64_t kNoEdge = INT64_MAX;

// Exact minimum-weight perfect matching on a dense graph via the primal-dual
// blossom algorithm, O(n^3). `cost` is row-major n*n, kNoEdge marks absent
// edges, n must be even and a perfect matching must exist over the present
// edges. Returns mate[i] for every node.
//
// The instance is reusable; solve() resets internal state.
class BlossomMatcher {
  public:
    std::vector<int> solve(int n, const std::vector<int64_t>& cost);

  private:
    struct Edge {
        int u = 0, v = 0;
        int64_t w = 0;
    };

    int n_ = 0, n_x_ = 0, timestamp_ = 0;
    std::vector<std::vector<Edge>> g_;
    std::vector<int64_t> lab_;
    std::vector<int> match_, slack_, st_, pa_, S_, vis_;
    std::vector<std::vector<int>> flower_;
    std::vector<std::vector<int>> flower_from_;
    std::vector<int> queue_;
    std::size_t queue_head_ = 0;

    int64_t e_delta(const Edge& e) const;
    void update_slack(int u, int x);
    void set_slack(int x);
    void q_push(int x);
    void set_st(int x, int b);
    int get_pr(int b, int xr);
    void set_match(int u, int v);
    void augment(int u, int v);
    int get_lca(int u, int v);
    void add_blossom(int u, int lca, int v);
    void expand_blossom(int b);
    bool on_found_edge(const Edge& e);
    bool matching();
};

}  // namespace surfmem
