#include "fantomette/vrf_beacon.hpp"

#include <algorithm>

namespace fantomette {

namespace {

Digest proof_tag(const Digest& sk, const Digest& x, const Digest& y) {
    return Hasher{}.tag("caucus/vrf-proof").put(sk).put(x).put(y).finish();
}

}  // namespace

Digest derive_public_key(const Digest& sk) { return sha256(sk); }

VrfKeypair gen_keypair(std::mt19937_64& rng) {
    VrfKeypair kp;
    for (std::size_t i = 0; i < kp.sk.size(); i += 8) {
        std::uint64_t w = rng();
        for (std::size_t j = 0; j < 8; ++j) kp.sk[i + j] = static_cast<std::uint8_t>(w >> (8 * j));
    }
    kp.pk = derive_public_key(kp.sk);
    return kp;
}

VrfOutput vrf_prove(const Digest& sk, const Digest& x) {
    std::array<std::uint8_t, 64> msg{};
    std::copy(sk.begin(), sk.end(), msg.begin());
    std::copy(x.begin(), x.end(), msg.begin() + 32);
    VrfOutput out;
    out.y = sha256(msg);
    out.proof = proof_tag(sk, x, out.y);
    return out;
}

void VrfOracle::enroll(const VrfKeypair& kp) { registry_[kp.pk] = kp.sk; }

bool VrfOracle::verify(const Digest& pk, const Digest& x, const VrfOutput& out) const {
    auto it = registry_.find(pk);
    if (it == registry_.end()) return false;
    const VrfOutput expected = vrf_prove(it->second, x);
    return expected == out;
}

Digest proof_of_delay(const Digest& r, std::uint64_t p_iters) {
    if (p_iters < 1) throw std::invalid_argument("proof_of_delay: p_iters must be >= 1");
    Digest cur = r;
    for (std::uint64_t i = 0; i < p_iters; ++i) cur = sha256(cur);
    return cur;
}

void CommitmentRegistry::commit(ParticipantId who, const Digest& pk, std::int64_t rnd_joined) {
    commitments_[who] = Commitment{pk, rnd_joined};
}

void CommitmentRegistry::withdraw(ParticipantId who) { commitments_.erase(who); }

const Commitment* CommitmentRegistry::find(ParticipantId who) const {
    auto it = commitments_.find(who);
    return it == commitments_.end() ? nullptr : &it->second;
}

std::uint64_t CommitmentRegistry::eligible_count(std::int64_t rnd, std::int64_t x_commit) const {
    return static_cast<std::uint64_t>(std::count_if(commitments_.begin(), commitments_.end(), [&](const auto& kv) {
        return kv.second.rnd_joined <= rnd - x_commit;
    }));
}

Digest EligibilityProof::fingerprint() const {
    return Hasher{}
        .tag("caucus/eligibility")
        .put_u64(participant)
        .put(y)
        .put(proof)
        .put_u64(static_cast<std::uint64_t>(rnd))
        .put_u64(redraw_depth)
        .finish();
}

BeaconState::BeaconState(Digest r, std::int64_t rnd, std::shared_ptr<const CommitmentRegistry> registry,
                         BeaconConfig cfg)
    : r_(r), rnd_(rnd), registry_(std::move(registry)), cfg_(cfg) {
    if (!registry_) throw std::invalid_argument("BeaconState: registry is null");
    n_rnd_ = registry_->eligible_count(rnd_, cfg_.x_commit);
    target_ = eligibility_target(n_rnd_, cfg_.rotation);
}

Digest eligibility_target(std::uint64_t n_rnd, bool rotation) {
    if (n_rnd == 0) return Digest{};
    if (rotation) return scaled_max_div(2, n_rnd + 1);
    return scaled_max_div(1, n_rnd);
}

Digest BeaconState::input_at(std::uint32_t depth) const {
    return depth == 0 ? r_ : proof_of_delay(r_, cfg_.pod_iters * depth);
}

BeaconState BeaconState::after_delay() const {
    BeaconState next = *this;
    next.delay_redraws_ += 1;
    return next;
}

bool BeaconState::is_committed(ParticipantId who) const {
    const Commitment* c = registry_->find(who);
    return c != nullptr && c->rnd_joined <= rnd_ - cfg_.x_commit;
}

bool below_target(const Digest& y, const Digest& target) { return sha256(y) < target; }

std::optional<EligibilityProof> check_eligibility(const BeaconState& state, ParticipantId who,
                                                  const VrfKeypair& kp, std::uint32_t redraw_depth) {
    const Commitment* c = state.registry().find(who);
    if (c == nullptr) throw NotCommittedError("participant has no commitment");
    if (c->rnd_joined > state.rnd() - state.config().x_commit) {
        throw NotCommittedError("participant committed fewer than x_commit rounds ago");
    }
    const Digest input = state.input_at(redraw_depth);
    const VrfOutput out = vrf_prove(kp.sk, input);
    if (!below_target(out.y, state.target())) return std::nullopt;
    return EligibilityProof{who, out.y, out.proof, state.rnd(), redraw_depth};
}

bool verify_eligibility(const BeaconState& state, const EligibilityProof& proof, const VrfVerifier& vrf) {
    if (proof.rnd != state.rnd()) return false;
    if (!state.is_committed(proof.participant)) return false;
    const Commitment* c = state.registry().find(proof.participant);
    const Digest input = state.input_at(proof.redraw_depth);
    if (!vrf.verify(c->pk, input, VrfOutput{proof.y, proof.proof})) return false;
    return below_target(proof.y, state.target());
}

BeaconState fold_beacon(const BeaconState& state, const EligibilityProof& proof, const VrfVerifier& vrf) {
    if (!verify_eligibility(state, proof, vrf)) throw InvalidProofError("eligibility proof does not verify");
    return BeaconState(xor_digest(state.input_at(proof.redraw_depth), proof.y), state.rnd() + 1,
                       state.registry_ptr(), state.config());
}

bool rotation_allowed(const BeaconState& state, ParticipantId who, std::span<const ParticipantId> recent_leaders) {
    const std::uint64_t n = state.n_rnd();
    const std::uint64_t window = n == 0 ? 0 : (n - 1) / 2;
    const std::size_t span = std::min<std::size_t>(window, recent_leaders.size());
    return std::find(recent_leaders.begin(), recent_leaders.begin() + static_cast<std::ptrdiff_t>(span), who) ==
           recent_leaders.begin() + static_cast<std::ptrdiff_t>(span);
}

}  // namespace fantomette
