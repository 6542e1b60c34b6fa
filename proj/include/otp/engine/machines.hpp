#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "otp/common.hpp"
#include "otp/qsim/gates.hpp"
#include "otp/tabler/table.hpp"

namespace otp::engine {

using qsim::GateG1;

// One round-trip unit: Alice proposes candidate lines for a request,
// announcing the lines her scan burned; Bob answers with a decline or the
// index of the first acceptable candidate; Alice then reveals the pad of the
// accepted candidate.
struct Proposal {
  std::uint64_t request_id = 0;
  std::vector<std::uint64_t> candidate_lines;
  std::vector<std::uint64_t> deleted_lines;
};

struct Response {
  std::uint64_t request_id = 0;
  std::uint8_t accept = 0;  // 0 = decline all candidates, else 1-based index
};

struct Reveal {
  std::uint64_t request_id = 0;
  std::uint8_t pad = 0;
};

struct CompletedRequest {
  std::uint64_t request_id = 0;
  GateG1 target = GateG1::Const0;  // alice side; mirrors her assignment
  std::uint64_t line_id = 0;
  std::uint8_t pad = 0;
  std::uint8_t output = 0;  // bob side only
};

// Alice-side audit record of a declined candidate; pads of declined
// candidates are never sent, so surfacing them here models a leaky
// implementation for the privacy analysis.
struct DeclinedCandidate {
  std::uint64_t request_id = 0;
  std::uint64_t line_id = 0;
  GateG1 target = GateG1::Const0;
  std::uint8_t pad = 0;
};

class AliceEngine {
 public:
  AliceEngine(tabler::SharedTableAlice table, std::uint64_t seed, bool collect_audit = false)
      : table_(std::move(table)), rng_(seed), audit_(collect_audit) {}

  void add_request(std::uint64_t request_id, GateG1 target) {
    requests_.push_back({request_id, target, {}, {}, false});
    ++pending_;
  }

  // Proposals for every request that has no outstanding candidate. Each
  // candidate draws a fresh pad; the scan deletes wrong-gate lines from the
  // head of the table and announces them.
  std::vector<Proposal> propose_round(int candidates_per_request = 1) {
    if (candidates_per_request < 1) fail(Errc::invalid_argument, "need at least one candidate");
    std::vector<Proposal> out;
    while (first_open_ < requests_.size() && requests_[first_open_].done) ++first_open_;
    for (std::size_t i = first_open_; i < requests_.size(); ++i) {
      Req& r = requests_[i];
      if (r.done || !r.cand_lines.empty()) continue;
      Proposal p;
      p.request_id = r.id;
      for (int c = 0; c < candidates_per_request; ++c) {
        const std::uint8_t pad = uniform_bit(rng_) ? 1 : 0;
        const GateG1 wanted = pad ? qsim::opposite(r.target) : r.target;
        const std::uint64_t line = scan_for(wanted, p.deleted_lines);
        r.cand_lines.push_back(line);
        r.cand_pads.push_back(pad);
        p.candidate_lines.push_back(line);
      }
      out.push_back(std::move(p));
    }
    return out;
  }

  // Applies Bob's responses; returns the reveals for accepted requests.
  std::vector<Reveal> absorb_responses(const std::vector<Response>& responses) {
    std::vector<Reveal> reveals;
    for (const Response& resp : responses) {
      Req& r = find_request(resp.request_id);
      if (r.done || r.cand_lines.empty())
        fail(Errc::protocol_violation, "response for request without outstanding proposal");
      if (resp.accept > r.cand_lines.size())
        fail(Errc::protocol_violation, "accept index out of range");
      for (std::size_t c = 0; c < r.cand_lines.size(); ++c) {
        tabler::AliceLine& line = line_ref(r.cand_lines[c]);
        if (resp.accept == c + 1) {
          line.status = tabler::LineStatus::Consumed;
        } else {
          line.status = tabler::LineStatus::Deleted;
          if (audit_) declined_.push_back({r.id, line.line_id, r.target, r.cand_pads[c]});
        }
      }
      if (resp.accept == 0) {
        r.cand_lines.clear();
        r.cand_pads.clear();
        continue;  // request returns to pending
      }
      const std::size_t idx = resp.accept - 1;
      completed_.push_back({r.id, r.target, r.cand_lines[idx], r.cand_pads[idx], 0});
      reveals.push_back({r.id, r.cand_pads[idx]});
      r.done = true;
      r.cand_lines.clear();
      r.cand_pads.clear();
      --pending_;
    }
    return reveals;
  }

  bool done() const { return pending_ == 0; }
  const std::vector<CompletedRequest>& completed() const { return completed_; }
  const std::vector<DeclinedCandidate>& declined_audit() const { return declined_; }
  tabler::SharedTableAlice& table() { return table_; }
  const tabler::SharedTableAlice& table() const { return table_; }
  std::uint64_t lines_deleted() const { return lines_deleted_; }

 private:
  struct Req {
    std::uint64_t id;
    GateG1 target;
    std::vector<std::uint64_t> cand_lines;
    std::vector<std::uint8_t> cand_pads;
    bool done;
  };

  std::uint64_t scan_for(GateG1 wanted, std::vector<std::uint64_t>& deleted) {
    while (head_ < table_.lines.size()) {
      tabler::AliceLine& line = table_.lines[head_];
      if (line.status != tabler::LineStatus::Available) {
        ++head_;
        continue;
      }
      if (line.gate == wanted) {
        line.status = tabler::LineStatus::Proposed;
        ++head_;
        return line.line_id;
      }
      line.status = tabler::LineStatus::Deleted;
      ++lines_deleted_;
      deleted.push_back(line.line_id);
      ++head_;
    }
    fail(Errc::table_exhausted, "no usable line left for proposal");
  }

  Req& find_request(std::uint64_t id) {
    // Requests are processed in registration order; responses arrive in the
    // same order, so a rolling cursor keeps this O(1) amortized.
    for (std::size_t probe = 0; probe < requests_.size(); ++probe) {
      Req& r = requests_[cursor_];
      cursor_ = cursor_ + 1 == requests_.size() ? 0 : cursor_ + 1;
      if (r.id == id) return r;
    }
    fail(Errc::protocol_violation, "response for unknown request");
  }

  tabler::AliceLine& line_ref(std::uint64_t line_id) {
    const auto it =
        std::lower_bound(table_.lines.begin(), table_.lines.end(), line_id,
                         [](const tabler::AliceLine& l, std::uint64_t id) { return l.line_id < id; });
    if (it == table_.lines.end() || it->line_id != line_id)
      fail(Errc::protocol_violation, "unknown line id");
    return *it;
  }

  tabler::SharedTableAlice table_;
  Rng rng_;
  bool audit_;
  std::vector<Req> requests_;
  std::vector<CompletedRequest> completed_;
  std::vector<DeclinedCandidate> declined_;
  std::size_t head_ = 0;
  std::size_t cursor_ = 0;
  std::size_t first_open_ = 0;
  std::size_t pending_ = 0;
  std::uint64_t lines_deleted_ = 0;
};

// Bob-side record of an examined-but-declined candidate, for the privacy
// analysis: what a passive observer of his view would hold.
struct DeclineRecord {
  std::uint64_t request_id = 0;
  std::uint64_t line_id = 0;
  std::uint8_t desired_input = 0;
  std::uint8_t line_input = 0;
  std::uint8_t line_output = 0;
};

class BobEngine {
 public:
  BobEngine(tabler::SharedTableBob table, bool collect_audit = false)
      : table_(std::move(table)), audit_(collect_audit) {}

  void add_request(std::uint64_t request_id, int desired_input) {
    requests_.push_back({request_id, static_cast<std::uint8_t>(desired_input & 1), 0, 0, 0,
                         Phase::Pending});
    ++open_;
  }

  // Applies a reveal (finishing an accepted request), must follow the accept.
  void apply_reveal(const Reveal& rev) {
    Req& r = find_request(rev.request_id);
    if (r.phase != Phase::AwaitReveal)
      fail(Errc::protocol_violation, "reveal for request not awaiting one");
    r.phase = Phase::Done;
    completed_.push_back(
        {r.id, GateG1::Const0, r.line_id, rev.pad,
         static_cast<std::uint8_t>(r.raw_output ^ (rev.pad & 1))});
    --open_;
  }

  Response respond(const Proposal& prop) {
    Req& r = find_request(prop.request_id);
    if (r.phase != Phase::Pending)
      fail(Errc::protocol_violation, "proposal for request not pending");
    for (std::uint64_t id : prop.deleted_lines) {
      tabler::BobLine& line = line_ref(id);
      if (line.status != tabler::LineStatus::Available)
        fail(Errc::protocol_violation, "peer deleted a non-available line");
      line.status = tabler::LineStatus::Deleted;
    }
    Response resp;
    resp.request_id = prop.request_id;
    std::size_t taken = prop.candidate_lines.size();
    for (std::size_t c = 0; c < prop.candidate_lines.size(); ++c) {
      tabler::BobLine& line = line_ref(prop.candidate_lines[c]);
      if (line.status != tabler::LineStatus::Available)
        fail(Errc::protocol_violation, "candidate line not available");
      if (c < taken) {
        if (line.input == r.desired) {
          line.status = tabler::LineStatus::Consumed;
          resp.accept = static_cast<std::uint8_t>(c + 1);
          r.line_id = line.line_id;
          r.raw_output = line.output;
          r.phase = Phase::AwaitReveal;
          taken = c;  // remaining candidates only get deleted
          continue;
        }
        if (audit_)
          declines_.push_back({r.id, line.line_id, r.desired, line.input, line.output});
        ++r.declines;
        line.status = tabler::LineStatus::Deleted;
      } else {
        line.status = tabler::LineStatus::Deleted;  // unexamined extras burn
      }
    }
    if (resp.accept == 0 && audit_) ++decline_rounds_;
    return resp;
  }

  bool done() const { return open_ == 0; }
  const std::vector<CompletedRequest>& completed() const { return completed_; }
  const std::vector<DeclineRecord>& decline_audit() const { return declines_; }
  // Decline count per request id, for the input-inference analysis.
  std::vector<std::pair<std::uint64_t, int>> decline_counts() const {
    std::vector<std::pair<std::uint64_t, int>> out;
    out.reserve(requests_.size());
    for (const Req& r : requests_) out.emplace_back(r.id, r.declines);
    return out;
  }
  std::uint8_t desired_of(std::uint64_t request_id) const {
    for (const Req& r : requests_)
      if (r.id == request_id) return r.desired;
    fail(Errc::invalid_argument, "unknown request id");
  }
  std::vector<std::pair<std::uint64_t, std::uint8_t>> desired_inputs() const {
    std::vector<std::pair<std::uint64_t, std::uint8_t>> out;
    out.reserve(requests_.size());
    for (const Req& r : requests_) out.emplace_back(r.id, r.desired);
    return out;
  }
  tabler::SharedTableBob& table() { return table_; }
  const tabler::SharedTableBob& table() const { return table_; }

 private:
  enum class Phase : std::uint8_t { Pending, AwaitReveal, Done };
  struct Req {
    std::uint64_t id;
    std::uint8_t desired;
    std::uint64_t line_id;
    std::uint8_t raw_output;
    int declines;
    Phase phase;
  };

  Req& find_request(std::uint64_t id) {
    for (std::size_t probe = 0; probe < requests_.size(); ++probe) {
      Req& r = requests_[cursor_];
      cursor_ = cursor_ + 1 == requests_.size() ? 0 : cursor_ + 1;
      if (r.id == id) return r;
    }
    fail(Errc::protocol_violation, "unknown request id");
  }

  tabler::BobLine& line_ref(std::uint64_t line_id) {
    const auto it =
        std::lower_bound(table_.lines.begin(), table_.lines.end(), line_id,
                         [](const tabler::BobLine& l, std::uint64_t id) { return l.line_id < id; });
    if (it == table_.lines.end() || it->line_id != line_id)
      fail(Errc::protocol_violation, "unknown line id");
    return *it;
  }

  tabler::SharedTableBob table_;
  bool audit_;
  std::vector<Req> requests_;
  std::vector<CompletedRequest> completed_;
  std::vector<DeclineRecord> declines_;
  std::size_t cursor_ = 0;
  std::size_t open_ = 0;
  std::uint64_t decline_rounds_ = 0;
};

}  // namespace otp::engine
