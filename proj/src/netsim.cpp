#include "fantomette/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fantomette {

std::uint64_t derive_run_seed(std::uint64_t master, std::uint64_t run_index) {
    const Digest d = Hasher{}.tag("fantomette/run-seed").put_u64(master).put_u64(run_index).finish();
    std::uint64_t s = 0;
    for (int i = 0; i < 8; ++i) s = (s << 8) | d[static_cast<std::size_t>(i)];
    return s;
}

namespace {

std::uint64_t sub_seed(std::uint64_t seed, std::string_view what) {
    const Digest d = Hasher{}.tag(what).put_u64(seed).finish();
    std::uint64_t s = 0;
    for (int i = 0; i < 8; ++i) s = (s << 8) | d[static_cast<std::size_t>(i)];
    return s;
}

struct InFlight {
    std::size_t agent;
    BlockPtr block;
};

class Simulation {
public:
    Simulation(const SimConfig& cfg, std::uint64_t run_index) : cfg_(cfg) {
        cfg_.validate();
        metrics_.run = run_index;
        metrics_.seed = derive_run_seed(cfg.seed, run_index);
        nb_ = cfg.byzantine_count();
        nr_ = cfg.rational_count();
        n_ = cfg.n_players;
        if (nb_ > 0) {
            metrics_.cls = AgentClass::byzantine;
            metrics_.coalition_size = nb_;
        } else if (nr_ > 0) {
            metrics_.cls = AgentClass::rational;
            metrics_.coalition_size = nr_;
        }
        delay_rng_.seed(sub_seed(metrics_.seed, "delays"));
        build();
    }

    RunMetrics run() {
        buckets_.assign(cfg_.delta_cap + 1, {});
        for (std::uint64_t slot = 0; slot < cfg_.slots; ++slot) {
            auto& due = buckets_[slot % buckets_.size()];
            for (auto& f : due) agents_[f.agent]->deliver(std::move(f.block));
            due.clear();
            for (std::size_t a = 0; a < agents_.size(); ++a) {
                for (const auto& b : agents_[a]->step(slot)) broadcast(a, b, slot);
            }
            track_prefixes(slot);
        }
        settle_run();
        return std::move(metrics_);
    }

private:
    AgentClass class_of(ParticipantId p) const {
        if (p < nb_) return AgentClass::byzantine;
        if (p < nb_ + nr_) return AgentClass::rational;
        return AgentClass::altruistic;
    }

    void build() {
        std::mt19937_64 key_rng(sub_seed(metrics_.seed, "keys"));
        auto registry = std::make_shared<CommitmentRegistry>();
        std::vector<Participant> players;
        for (ParticipantId p = 0; p < n_; ++p) {
            Participant part{p, gen_keypair(key_rng)};
            oracle_.enroll(part.keys);
            registry->commit(p, part.keys.pk, -cfg_.x_commit);
            players.push_back(std::move(part));
        }
        const Digest g_beacon = Hasher{}.tag("fantomette/genesis").put_u64(metrics_.seed).finish();
        auto genesis = std::make_shared<const Block>(Block::genesis(g_beacon));

        params_.genesis = genesis;
        params_.chain = ChainContext{registry, BeaconConfig{cfg_.x_commit, cfg_.rotation, cfg_.pod_iters}, &oracle_};
        params_.finality = FinalityConfig{n_, cfg_.w};
        params_.score_mode = cfg_.score_mode;
        params_.delay_pod = cfg_.delay_pod;
        params_.n_players = n_;
        params_.incentives = cfg_.incentive_params();
        params_.rational_depth = cfg_.rational_depth;
        params_.rational_horizon = cfg_.rational_horizon;
        params_.rational_rollouts = cfg_.rational_rollouts;
        params_.seed = sub_seed(metrics_.seed, "rational");

        observer_ = BlockDag(cfg_.score_mode);
        observer_fin_ = std::make_unique<FinalityTracker>(params_.finality);
        observer_.insert(genesis);
        observer_fin_->on_insert(observer_, 0);
        created_.push_back(0);

        auto group = [&](ParticipantId from, ParticipantId to) {
            return std::vector<Participant>(players.begin() + from, players.begin() + to);
        };
        if (nb_ > 0) add_agent(make_agent(AgentClass::byzantine, group(0, nb_), params_));
        if (nr_ > 0) add_agent(make_agent(AgentClass::rational, group(nb_, nb_ + nr_), params_));
        for (ParticipantId p = nb_ + nr_; p < n_; ++p) add_agent(make_agent(AgentClass::altruistic, {players[p]}, params_));
        confirmed_.assign(agents_.size(), 0);
        seen_size_.assign(agents_.size(), 0);
    }

    void add_agent(std::unique_ptr<Agent> a) { agents_.push_back(std::move(a)); }

    std::uint64_t sample_delay() {
        std::exponential_distribution<double> exp(1.0 / cfg_.delay_mean);
        const double d = std::ceil(exp(delay_rng_));
        return static_cast<std::uint64_t>(std::clamp(d, 1.0, static_cast<double>(cfg_.delta_cap)));
    }

    void broadcast(std::size_t from, const BlockPtr& b, std::uint64_t slot) {
        if (observer_.contains(b->id)) return;
        if (verify_block(observer_, *b, params_.chain, observer_fin_.get())) ++metrics_.invalid_broadcasts;
        observer_.insert(b);
        const auto idx = static_cast<BlockDag::Index>(observer_.size() - 1);
        const std::size_t before = observer_fin_->events().size();
        observer_fin_->on_insert(observer_, idx);
        created_.push_back(slot);
        const auto& ev = observer_fin_->events();
        for (std::size_t i = before; i < ev.size(); ++i) {
            metrics_.finality_events.push_back(
                {slot, ev[i].rank, ev[i].kind, observer_.id_of(ev[i].block), observer_.id_of(ev[i].candidate)});
        }
        for (std::size_t to = 0; to < agents_.size(); ++to) {
            if (to == from) continue;
            std::uint64_t delay = std::numeric_limits<std::uint64_t>::max();
            for (std::size_t m = 0; m < agents_[to]->members().size(); ++m) delay = std::min(delay, sample_delay());
            if (delay > cfg_.delta_cap) ++metrics_.late_deliveries;
            buckets_[(slot + delay) % buckets_.size()].push_back({to, b});
        }
    }

    // Depth-k0 ancestor of every altruist's fork-choice tip; moving to a
    // block on another branch is a prefix reorganisation.
    void track_prefixes(std::uint64_t slot) {
        for (std::size_t a = 0; a < agents_.size(); ++a) {
            const Agent& ag = *agents_[a];
            if (ag.agent_class() != AgentClass::altruistic) continue;
            const BlockDag& v = ag.view();
            if (v.size() == seen_size_[a]) continue;
            seen_size_[a] = v.size();
            BlockDag::Index x = fcr_index(v);
            for (std::uint64_t i = 0; i < cfg_.convergence_depth && x != v.genesis(); ++i) x = v.prev_of(x);
            const BlockDag::Index old = confirmed_[a];
            if (x != old && !v.in_ancestors(old, x) && !v.in_ancestors(x, old)) {
                ++metrics_.prefix_reorgs;
                metrics_.convergence_slot = slot + 1;
            }
            confirmed_[a] = x;
        }
    }

    void settle_run() {
        for (auto& a : agents_) {
            if (auto* r = dynamic_cast<RationalCoalition*>(a.get())) {
                metrics_.rational_decisions += r->decisions();
                metrics_.rational_withholds += r->withhold_choices();
                r->drop_withheld();
            }
            metrics_.alarms += a->alarms();
        }
        std::vector<const BlockDag*> views;
        std::vector<ParticipantId> ids;
        for (const auto& a : agents_) {
            for (const auto& m : a->members()) {
                views.push_back(&a->view());
                ids.push_back(m.id);
            }
        }
        const IncentiveParams ip = cfg_.incentive_params();
        const std::vector<Payoff> pays = settle(views, ids, ip);
        double sum_alt = 0.0;
        double sum_coal = 0.0;
        std::size_t n_alt = 0;
        std::size_t n_coal = 0;
        for (const auto& p : pays) {
            const AgentClass c = class_of(p.player);
            metrics_.payoffs.push_back({c, p});
            if (c == AgentClass::altruistic) {
                sum_alt += p.total;
                ++n_alt;
            } else {
                sum_coal += p.total;
                ++n_coal;
            }
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        metrics_.payoff_altruistic = n_alt ? sum_alt / static_cast<double>(n_alt) : nan;
        metrics_.payoff_coalition = n_coal ? sum_coal / static_cast<double>(n_coal) : nan;

        const BlockDag g = bcpc(views, cfg_.score_mode);
        const LabelMap lm = label(g, ip.k);
        std::size_t on_chain = 0;
        std::size_t by_coalition = 0;
        std::vector<BlockDag::Index> chain;
        for (BlockDag::Index i = 1; i < g.size(); ++i) {
            if (lm.labels[i] != Label::winner) continue;
            chain.push_back(i);
            ++on_chain;
            if (class_of(g.block(i).sender) != AgentClass::altruistic) ++by_coalition;
        }
        metrics_.main_chain_length = on_chain;
        metrics_.quality_coalition = on_chain ? static_cast<double>(by_coalition) / static_cast<double>(on_chain) : 0.0;
        metrics_.quality_altruistic = on_chain ? 1.0 - metrics_.quality_coalition : 0.0;
        if (!chain.empty()) {
            const std::uint64_t last = created_[observer_.index_of(g.id_of(chain.back()))];
            metrics_.mean_gap = static_cast<double>(last) / static_cast<double>(chain.size());
        }

        metrics_.blocks = observer_.size() - 1;
        metrics_.finality_violations = observer_fin_->violations(observer_);
        metrics_.longest_fork = longest_fork();
    }

    // Longest prev-chain of blocks off the observer's main chain.
    std::size_t longest_fork() const {
        const BlockDag::Index tip = fcr_index(observer_);
        IndexSet main = observer_.ancestor_set(tip);
        main.set(tip);
        std::vector<std::size_t> run(observer_.size(), 0);
        std::size_t best = 0;
        for (BlockDag::Index i = 1; i < observer_.size(); ++i) {
            if (main.test(i)) continue;
            const BlockDag::Index p = observer_.prev_of(i);
            run[i] = (main.test(p) ? 0 : run[p]) + 1;
            best = std::max(best, run[i]);
        }
        return best;
    }

    SimConfig cfg_;
    RunMetrics metrics_;
    std::uint64_t nb_ = 0;
    std::uint64_t nr_ = 0;
    std::uint64_t n_ = 0;
    std::mt19937_64 delay_rng_;
    VrfOracle oracle_;
    AgentParams params_;
    std::vector<std::unique_ptr<Agent>> agents_;
    std::vector<std::vector<InFlight>> buckets_;
    BlockDag observer_;
    std::unique_ptr<FinalityTracker> observer_fin_;
    std::vector<std::uint64_t> created_;
    std::vector<BlockDag::Index> confirmed_;
    std::vector<std::size_t> seen_size_;
};

std::string fixed_or_nan(double v) { return format_fixed(v); }

}  // namespace

RunMetrics run_simulation(const SimConfig& cfg, std::uint64_t run_index) {
    Simulation sim(cfg, run_index);
    return sim.run();
}

std::vector<RunMetrics> sweep(const SimConfig& cfg, const std::vector<std::uint64_t>& sizes, AgentClass cls) {
    std::vector<RunMetrics> out;
    for (std::uint64_t size : sizes) {
        SimConfig c = cfg;
        const double f = static_cast<double>(size) / static_cast<double>(cfg.n_players);
        c.f_byzantine = cls == AgentClass::byzantine ? f : 0.0;
        c.f_rational = cls == AgentClass::rational ? f : 0.0;
        c.f_altruistic = 1.0 - f;
        for (std::uint64_t r = 0; r < cfg.runs; ++r) {
            RunMetrics m = run_simulation(c, r);
            m.cls = cls;
            m.coalition_size = size;
            out.push_back(std::move(m));
        }
    }
    return out;
}

void write_metrics_csv(std::ostream& os, const std::vector<RunMetrics>& rows) {
    os << "run-id,coalition-size,class,longest_fork,quality_altruistic,quality_coalition,payoff_altruistic,"
          "payoff_coalition,finality_violations,convergence_slot,prefix_reorgs,main_chain_length,blocks,mean_gap,"
          "invalid_broadcasts,alarms,rational_decisions,rational_withholds\n";
    for (const auto& m : rows) {
        os << m.run << ',' << m.coalition_size << ',' << to_string(m.cls) << ',' << m.longest_fork << ','
           << fixed_or_nan(m.quality_altruistic) << ',' << fixed_or_nan(m.quality_coalition) << ','
           << fixed_or_nan(m.payoff_altruistic) << ',' << fixed_or_nan(m.payoff_coalition) << ','
           << m.finality_violations << ',' << m.convergence_slot << ',' << m.prefix_reorgs << ','
           << m.main_chain_length << ',' << m.blocks << ',' << fixed_or_nan(m.mean_gap) << ','
           << m.invalid_broadcasts << ',' << m.alarms << ',' << m.rational_decisions << ',' << m.rational_withholds
           << '\n';
    }
}

void write_payoffs_csv(std::ostream& os, const std::vector<RunMetrics>& rows) {
    os << "run-id,coalition-size,sweep-class,player,player-class,reward_sum,pun_count,bigpun_count,total\n";
    for (const auto& m : rows) {
        for (const auto& p : m.payoffs) {
            os << m.run << ',' << m.coalition_size << ',' << to_string(m.cls) << ',' << p.payoff.player << ','
               << to_string(p.cls) << ',' << fixed_or_nan(p.payoff.reward_sum) << ',' << p.payoff.pun_count << ','
               << p.payoff.bigpun_count << ',' << fixed_or_nan(p.payoff.total) << '\n';
        }
    }
}

void write_finality_csv(std::ostream& os, const std::vector<RunMetrics>& rows) {
    os << "run-id,coalition-size,class,slot,rank,kind,block,candidate\n";
    for (const auto& m : rows) {
        for (const auto& e : m.finality_events) {
            os << m.run << ',' << m.coalition_size << ',' << to_string(m.cls) << ',' << e.slot << ',' << e.rank << ','
               << to_string(e.kind) << ',' << to_hex(e.block) << ',' << to_hex(e.candidate) << '\n';
        }
    }
}

}  // namespace fantomette
