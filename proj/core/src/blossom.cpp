#include "surfmem/blossom.hpp"

#include <algorithm>
#include <stdexcept>

#include "surfmem/error.hpp"

namespace surfmem {

// Primal-dual weighted blossom after Galil's exposition; maximises the shifted
// weights internally, so the caller's minimum-cost perfect matching drops out.

int64_t BlossomMatcher::e_delta(const Edge& e) const {
    return lab_[e.u] + lab_[e.v] - g_[e.u][e.v].w * 2;
}

void BlossomMatcher::update_slack(int u, int x) {
    if (!slack_[x] || e_delta(g_[u][x]) < e_delta(g_[slack_[x]][x])) slack_[x] = u;
}

void BlossomMatcher::set_slack(int x) {
    slack_[x] = 0;
    for (int u = 1; u <= n_; ++u) {
        if (g_[u][x].w > 0 && st_[u] != x && S_[st_[u]] == 0) update_slack(u, x);
    }
}

void BlossomMatcher::q_push(int x) {
    if (x <= n_) {
        queue_.push_back(x);
    } else {
        for (int y : flower_[x]) q_push(y);
    }
}

void BlossomMatcher::set_st(int x, int b) {
    st_[x] = b;
    if (x > n_) {
        for (int y : flower_[x]) set_st(y, b);
    }
}

int BlossomMatcher::get_pr(int b, int xr) {
    auto& f = flower_[b];
    int pr = static_cast<int>(std::find(f.begin(), f.end(), xr) - f.begin());
    if (pr % 2 == 1) {
        std::reverse(f.begin() + 1, f.end());
        return static_cast<int>(f.size()) - pr;
    }
    return pr;
}

void BlossomMatcher::set_match(int u, int v) {
    match_[u] = g_[u][v].v;
    if (u <= n_) return;
    Edge e = g_[u][v];
    int xr = flower_from_[u - n_ - 1][e.u];
    int pr = get_pr(u, xr);
    auto& f = flower_[u];
    for (int i = 0; i < pr; ++i) set_match(f[i], f[i ^ 1]);
    set_match(xr, v);
    std::rotate(f.begin(), f.begin() + pr, f.end());
}

void BlossomMatcher::augment(int u, int v) {
    for (;;) {
        int xnv = st_[match_[u]];
        set_match(u, v);
        if (!xnv) return;
        set_match(xnv, st_[pa_[xnv]]);
        u = st_[pa_[xnv]];
        v = xnv;
    }
}

int BlossomMatcher::get_lca(int u, int v) {
    ++timestamp_;
    while (u || v) {
        if (u) {
            if (vis_[u] == timestamp_) return u;
            vis_[u] = timestamp_;
            u = st_[match_[u]];
            if (u) u = st_[pa_[u]];
        }
        std::swap(u, v);
    }
    return 0;
}

void BlossomMatcher::add_blossom(int u, int lca, int v) {
    int b = n_ + 1;
    while (b <= n_x_ && st_[b]) ++b;
    if (b > n_x_) ++n_x_;
    lab_[b] = 0;
    S_[b] = 0;
    match_[b] = match_[lca];
    auto& f = flower_[b];
    f.clear();
    f.push_back(lca);
    for (int x = u, y; x != lca; x = st_[pa_[y]]) {
        f.push_back(x);
        y = st_[match_[x]];
        f.push_back(y);
        q_push(y);
    }
    std::reverse(f.begin() + 1, f.end());
    for (int x = v, y; x != lca; x = st_[pa_[y]]) {
        f.push_back(x);
        y = st_[match_[x]];
        f.push_back(y);
        q_push(y);
    }
    set_st(b, b);
    for (int x = 1; x <= n_x_; ++x) g_[b][x].w = g_[x][b].w = 0;
    auto& from = flower_from_[b - n_ - 1];
    std::fill(from.begin(), from.end(), 0);
    for (int xs : f) {
        for (int x = 1; x <= n_x_; ++x) {
            if (g_[b][x].w == 0 || e_delta(g_[xs][x]) < e_delta(g_[b][x])) {
                g_[b][x] = g_[xs][x];
                g_[x][b] = g_[x][xs];
            }
        }
        if (xs <= n_) {
            from[xs] = xs;
        } else {
            const auto& child = flower_from_[xs - n_ - 1];
            for (int x = 1; x <= n_; ++x) {
                if (child[x]) from[x] = xs;
            }
        }
    }
    set_slack(b);
}

void BlossomMatcher::expand_blossom(int b) {
    auto& f = flower_[b];
    for (int x : f) set_st(x, x);
    int xr = flower_from_[b - n_ - 1][g_[b][pa_[b]].u];
    int pr = get_pr(b, xr);
    for (int i = 0; i < pr; i += 2) {
        int xs = f[i];
        int xns = f[i + 1];
        pa_[xs] = g_[xns][xs].u;
        S_[xs] = 1;
        S_[xns] = 0;
        slack_[xs] = 0;
        set_slack(xns);
        q_push(xns);
    }
    S_[xr] = 1;
    pa_[xr] = pa_[b];
    for (int i = pr + 1; i < static_cast<int>(f.size()); ++i) {
        S_[f[i]] = -1;
        set_slack(f[i]);
    }
    st_[b] = 0;
}

bool BlossomMatcher::on_found_edge(const Edge& e) {
    int u = st_[e.u], v = st_[e.v];
    if (S_[v] == -1) {
        pa_[v] = e.u;
        S_[v] = 1;
        int nu = st_[match_[v]];
        slack_[v] = slack_[nu] = 0;
        S_[nu] = 0;
        q_push(nu);
    } else if (S_[v] == 0) {
        int lca = get_lca(u, v);
        if (!lca) {
            augment(u, v);
            augment(v, u);
            return true;
        }
        add_blossom(u, lca, v);
    }
    return false;
}

bool BlossomMatcher::matching() {
    std::fill(S_.begin(), S_.begin() + n_x_ + 1, -1);
    std::fill(slack_.begin(), slack_.begin() + n_x_ + 1, 0);
    queue_.clear();
    queue_head_ = 0;
    for (int x = 1; x <= n_x_; ++x) {
        if (st_[x] == x && !match_[x]) {
            pa_[x] = 0;
            S_[x] = 0;
            q_push(x);
        }
    }
    if (queue_.empty()) return false;
    for (;;) {
        while (queue_head_ < queue_.size()) {
            int u = queue_[queue_head_++];
            if (S_[st_[u]] == 1) continue;
            for (int v = 1; v <= n_; ++v) {
                if (g_[u][v].w > 0 && st_[u] != st_[v]) {
                    if (e_delta(g_[u][v]) == 0) {
                        if (on_found_edge(g_[u][v])) return true;
                    } else {
                        update_slack(u, st_[v]);
                    }
                }
            }
        }
        int64_t d = INT64_MAX;
        for (int b = n_ + 1; b <= n_x_; ++b) {
            if (st_[b] == b && S_[b] == 1) d = std::min(d, lab_[b] / 2);
        }
        for (int x = 1; x <= n_x_; ++x) {
            if (st_[x] == x && slack_[x]) {
                if (S_[x] == -1) {
                    d = std::min(d, e_delta(g_[slack_[x]][x]));
                } else if (S_[x] == 0) {
                    d = std::min(d, e_delta(g_[slack_[x]][x]) / 2);
                }
            }
        }
        for (int u = 1; u <= n_; ++u) {
            if (S_[st_[u]] == 0) {
                if (lab_[u] <= d) return false;  // no further augmenting path
                lab_[u] -= d;
            } else if (S_[st_[u]] == 1) {
                lab_[u] += d;
            }
        }
        for (int b = n_ + 1; b <= n_x_; ++b) {
            if (st_[b] == b && S_[b] != -1) {
                if (S_[b] == 0) {
                    lab_[b] += d * 2;
                } else {
                    lab_[b] -= d * 2;
                }
            }
        }
        queue_.clear();
        queue_head_ = 0;
        for (int x = 1; x <= n_x_; ++x) {
            if (st_[x] == x && slack_[x] && st_[slack_[x]] != x &&
                e_delta(g_[slack_[x]][x]) == 0) {
                if (on_found_edge(g_[slack_[x]][x])) return true;
            }
        }
        for (int b = n_ + 1; b <= n_x_; ++b) {
            if (st_[b] == b && S_[b] == 1 && lab_[b] == 0) expand_blossom(b);
        }
    }
}

std::vector<int> BlossomMatcher::solve(int n, const std::vector<int64_t>& cost) {
    if (n % 2 != 0) throw std::invalid_argument("perfect matching needs an even node count");
    n_ = n;
    n_x_ = n;
    timestamp_ = 0;
    const int cap = 2 * n + 1;
    if (static_cast<int>(g_.size()) < cap) {
        g_.assign(cap, std::vector<Edge>(cap));
        lab_.assign(cap, 0);
        match_.assign(cap, 0);
        slack_.assign(cap, 0);
        st_.assign(cap, 0);
        pa_.assign(cap, 0);
        S_.assign(cap, -1);
        vis_.assign(cap, 0);
        flower_.assign(cap, {});
        flower_from_.assign(n, std::vector<int>(n + 1, 0));
    }
    if (static_cast<int>(flower_from_.size()) < n ||
        static_cast<int>(flower_from_[0].size()) < n + 1) {
        flower_from_.assign(n, std::vector<int>(n + 1, 0));
    }

    // Shift costs so the maximum-weight matching is the minimum-cost perfect
    // matching: w = (max_cost + 1) - cost, absent edges get w = 0.
    int64_t max_cost = 0;
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            const int64_t c = cost[static_cast<std::size_t>(u) * n + v];
            if (u != v && c != kNoEdge) max_cost = std::max(max_cost, c);
        }
    }
    const int64_t shift = max_cost + 1;
    int64_t w_max = 0;
    for (int u = 1; u <= 2 * n; ++u) {
        match_[u] = 0;
        st_[u] = u;
        flower_[u].clear();
    }
    for (int u = 1; u <= n; ++u) {
        for (int v = 1; v <= n; ++v) {
            const int64_t c = cost[static_cast<std::size_t>(u - 1) * n + (v - 1)];
            int64_t w = (u != v && c != kNoEdge) ? shift - c : 0;
            g_[u][v] = Edge{u, v, w};
            w_max = std::max(w_max, w);
        }
    }
    for (int u = 1; u <= n; ++u) lab_[u] = w_max;

    while (matching()) {
    }

    std::vector<int> mate(n, -1);
    for (int u = 1; u <= n; ++u) {
        if (match_[u] == 0) throw integrity_error("graph admits no perfect matching");
        mate[u - 1] = match_[u] - 1;
    }
    for (int u = 0; u < n; ++u) {
        if (mate[mate[u]] != u) throw integrity_error("blossom produced an inconsistent matching");
    }
    return mate;
}

}  // namespace surfmem
