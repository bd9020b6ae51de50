#pragma once

// Caucus leader election: VRF keys and proofs, the XOR-folded random beacon,
// per-round eligibility, proof-of-delay redraws, commit delay and rotation.

#include "fantomette/hash.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace fantomette {

using ParticipantId = std::uint32_t;

struct VrfKeypair {
    Digest sk{};
    Digest pk{};

    /// Public half only; sk is never serialized.
    std::string public_hex() const { return to_hex(pk); }
};

struct VrfOutput {
    Digest y{};
    Digest proof{};
    friend bool operator==(const VrfOutput&, const VrfOutput&) = default;
};

/// pk = H(sk); sk drawn from the caller's deterministic generator.
VrfKeypair gen_keypair(std::mt19937_64& rng);
Digest derive_public_key(const Digest& sk);

/// Keyed-hash VRF: y = H(sk || x). The proof is a MAC over (x, y) that only
/// a verifier holding sk can check.
VrfOutput vrf_prove(const Digest& sk, const Digest& x);

/// Anything that can check VRF outputs. A production VRF (e.g. EC-VRF) would
/// implement this with public verification.
class VrfVerifier {
public:
    virtual ~VrfVerifier() = default;
    virtual bool verify(const Digest& pk, const Digest& x, const VrfOutput& out) const = 0;
};

/// Simulation verification oracle: holds pk -> sk. Lives in the test/sim
/// environment, never inside agent-visible state.
class VrfOracle final : public VrfVerifier {
public:
    void enroll(const VrfKeypair& kp);
    bool verify(const Digest& pk, const Digest& x, const VrfOutput& out) const override;
    std::size_t size() const { return registry_.size(); }

private:
    std::unordered_map<Digest, Digest, DigestHash> registry_;
};

/// F = H^p_iters.
Digest proof_of_delay(const Digest& r, std::uint64_t p_iters);

struct Commitment {
    Digest pk{};
    std::int64_t rnd_joined = 0;
};

struct BeaconConfig {
    std::int64_t x_commit = 10;
    bool rotation = false;
    /// Hash iterations per proof-of-delay application.
    std::uint64_t pod_iters = 1;
};

/// Public registry of Commit transactions. Shared (read-only) by every
/// beacon state that refers to it.
class CommitmentRegistry {
public:
    void commit(ParticipantId who, const Digest& pk, std::int64_t rnd_joined);
    void withdraw(ParticipantId who);
    const Commitment* find(ParticipantId who) const;
    const std::map<ParticipantId, Commitment>& all() const { return commitments_; }

    /// Participants that joined at or before rnd - x_commit.
    std::uint64_t eligible_count(std::int64_t rnd, std::int64_t x_commit) const;

private:
    std::map<ParticipantId, Commitment> commitments_;
};

class NotCommittedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidProofError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EligibilityProof {
    ParticipantId participant = 0;
    Digest y{};
    Digest proof{};
    std::int64_t rnd = 0;
    std::uint32_t redraw_depth = 0;

    friend bool operator==(const EligibilityProof&, const EligibilityProof&) = default;
    /// Canonical digest of every field; blocks sharing it share a proof.
    Digest fingerprint() const;
};

class BeaconState {
public:
    BeaconState(Digest r, std::int64_t rnd, std::shared_ptr<const CommitmentRegistry> registry,
                BeaconConfig cfg = {});

    const Digest& r() const { return r_; }
    std::int64_t rnd() const { return rnd_; }
    std::uint32_t delay_redraws() const { return delay_redraws_; }
    const BeaconConfig& config() const { return cfg_; }
    const CommitmentRegistry& registry() const { return *registry_; }
    std::shared_ptr<const CommitmentRegistry> registry_ptr() const { return registry_; }

    /// Counted when the state is built; the registry is a snapshot per round.
    std::uint64_t n_rnd() const { return n_rnd_; }
    /// floor(H_max / n_rnd), or floor(H_max / ((n_rnd+1)/2)) with rotation.
    const Digest& target() const { return target_; }

    /// F^depth(r): the beacon input after `depth` proof-of-delay redraws.
    Digest input_at(std::uint32_t depth) const;

    /// Records one more proof-of-delay application in the current round.
    BeaconState after_delay() const;

    bool is_committed(ParticipantId who) const;

private:
    Digest r_;
    std::int64_t rnd_;
    std::shared_ptr<const CommitmentRegistry> registry_;
    BeaconConfig cfg_;
    std::uint32_t delay_redraws_ = 0;
    std::uint64_t n_rnd_ = 0;
    Digest target_{};
};

Digest eligibility_target(std::uint64_t n_rnd, bool rotation);
bool below_target(const Digest& y, const Digest& target);

/// Proof iff H(G_sk(F^depth(R))) < target. Throws NotCommittedError when the
/// participant is unknown or joined fewer than x_commit rounds ago.
std::optional<EligibilityProof> check_eligibility(const BeaconState& state, ParticipantId who,
                                                  const VrfKeypair& kp, std::uint32_t redraw_depth);

/// True when the proof verifies against `state` and clears the target.
bool verify_eligibility(const BeaconState& state, const EligibilityProof& proof, const VrfVerifier& vrf);

/// R' = F^depth(R) xor y, rnd + 1, redraw counter reset.
BeaconState fold_beacon(const BeaconState& state, const EligibilityProof& proof, const VrfVerifier& vrf);

/// Optional rotation rule: reject anyone who led in the last floor((n_rnd-1)/2)
/// rounds. `recent_leaders` is ordered most recent first.
bool rotation_allowed(const BeaconState& state, ParticipantId who,
                      std::span<const ParticipantId> recent_leaders);

}  // namespace fantomette
