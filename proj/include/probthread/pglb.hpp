#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "probthread/meadow.hpp"
#include "probthread/thread.hpp"

namespace probthread::pglb {

struct PlainBasic {
  std::string name;
  friend bool operator==(const PlainBasic&, const PlainBasic&) = default;
};
struct PosTest {
  std::string name;
  friend bool operator==(const PosTest&, const PosTest&) = default;
};
struct NegTest {
  std::string name;
  friend bool operator==(const NegTest&, const NegTest&) = default;
};
struct PlainRandom {
  Probability p;
  friend bool operator==(const PlainRandom&, const PlainRandom&) = default;
};
struct PosRandom {
  Probability p;
  friend bool operator==(const PosRandom&, const PosRandom&) = default;
};
struct NegRandom {
  Probability p;
  friend bool operator==(const NegRandom&, const NegRandom&) = default;
};
struct FwdJump {
  std::size_t offset;
  friend bool operator==(const FwdJump&, const FwdJump&) = default;
};
struct BwdJump {
  std::size_t offset;
  friend bool operator==(const BwdJump&, const BwdJump&) = default;
};
struct Halt {
  friend bool operator==(const Halt&, const Halt&) = default;
};

using Instruction =
    std::variant<PlainBasic, PosTest, NegTest, PlainRandom, PosRandom, NegRandom, FwdJump, BwdJump, Halt>;

/// u_1 ; ... ; u_k with k >= 1.
class Program {
 public:
  explicit Program(std::vector<Instruction> instructions);

  std::size_t size() const { return instructions_.size(); }
  /// 1-based.
  const Instruction& at(std::size_t position) const { return instructions_.at(position - 1); }
  const std::vector<Instruction>& instructions() const { return instructions_; }

  bool has_random_choice() const;

  friend bool operator==(const Program&, const Program&) = default;

 private:
  std::vector<Instruction> instructions_;
};

/// `a`, `+a`, `-a`, `%p`, `+%p`, `-%p`, `#l`, `\l`, `!`, separated by `;`.
/// Whitespace is insignificant and `//` starts a line comment. Throws
/// ParseError with the byte offset.
Program parse(std::string_view text);

std::string to_string(const Instruction& instruction);
std::string to_string(const Program& program);

/// The action a basic instruction stands for: `f.m` splits at the first dot,
/// an undotted name gets the focus `main`.
Action instruction_action(const std::string& name);

/// Action performed by a random choice instruction: random.get(p).
Action random_action(const Probability& p);

/// Thread produced by execution starting at `position` (1-based), before the
/// random service is attached. Positions outside 1..k, and positions that
/// start an infinite jump chain, give D.
ThreadGraph extract_at(std::size_t position, const Program& program);

struct ExtractOptions {
  std::size_t entry = 1;
  /// Attach {random: Random} through the use operator.
  bool use_random = true;
  /// Conceal tau afterwards.
  bool abstraction = true;
};

/// abstract_tau(use(extract_at(entry, p), {random: Random})), normalized.
ThreadGraph extract(const Program& program, const ExtractOptions& options = {});

}  // namespace probthread::pglb
