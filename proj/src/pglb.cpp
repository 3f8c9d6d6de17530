#include "probthread/pglb.hpp"

#include <cctype>
#include <set>
#include <unordered_map>

#include "probthread/error.hpp"
#include "probthread/interaction.hpp"
#include "probthread/service.hpp"

namespace probthread::pglb {

Program::Program(std::vector<Instruction> instructions) : instructions_(std::move(instructions)) {
  if (instructions_.empty()) throw Error("an instruction sequence needs at least one instruction");
}

bool Program::has_random_choice() const {
  for (const auto& u : instructions_) {
    if (std::holds_alternative<PlainRandom>(u) || std::holds_alternative<PosRandom>(u) ||
        std::holds_alternative<NegRandom>(u)) {
      return true;
    }
  }
  return false;
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string parse_name(std::string_view text, std::size_t offset) {
  if (text.empty()) throw ParseError("missing basic instruction name", offset);
  if (!(std::isalpha(static_cast<unsigned char>(text[0])) || text[0] == '_')) {
    throw ParseError("basic instruction must start with a letter", offset);
  }
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '.')) {
      throw ParseError("unexpected character in basic instruction", offset + i);
    }
  }
  if (text.back() == '.') throw ParseError("basic instruction ends with '.'", offset + text.size() - 1);
  return std::string(text);
}

std::size_t parse_offset(std::string_view text, std::size_t offset) {
  if (text.empty()) throw ParseError("missing jump offset", offset);
  std::size_t value = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) throw ParseError("jump offset must be a natural", offset + i);
    value = value * 10 + static_cast<std::size_t>(text[i] - '0');
    if (value > (std::size_t{1} << 40)) throw ParseError("jump offset too large", offset);
  }
  return value;
}

Probability parse_probability(std::string_view text, std::size_t offset) {
  if (text.empty()) throw ParseError("missing probability", offset);
  MeadowValue v;
  try {
    v = MeadowValue::parse(text);
  } catch (const ParseError& e) {
    throw ParseError("malformed probability", offset + e.position());
  }
  if (!is_probability(v)) throw ParseError("probability " + v.to_string() + " outside [0,1]", offset);
  return Probability(v);
}

Instruction parse_instruction(std::string_view text, std::size_t offset) {
  if (text == "!") return Halt{};
  if (text.front() == '#') return FwdJump{parse_offset(text.substr(1), offset + 1)};
  if (text.front() == '\\') return BwdJump{parse_offset(text.substr(1), offset + 1)};
  if (text.front() == '%') return PlainRandom{parse_probability(text.substr(1), offset + 1)};
  if (text.starts_with("+%")) return PosRandom{parse_probability(text.substr(2), offset + 2)};
  if (text.starts_with("-%")) return NegRandom{parse_probability(text.substr(2), offset + 2)};
  if (text.front() == '+') return PosTest{parse_name(text.substr(1), offset + 1)};
  if (text.front() == '-') return NegTest{parse_name(text.substr(1), offset + 1)};
  return PlainBasic{parse_name(text, offset)};
}

}  // namespace

Program parse(std::string_view source) {
  // blank out comments so offsets stay meaningful
  std::string text(source);
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] == '/' && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') text[i++] = ' ';
    }
  }

  std::vector<Instruction> instructions;
  std::size_t start = 0;
  while (true) {
    std::size_t end = text.find(';', start);
    std::size_t stop = end == std::string::npos ? text.size() : end;
    // whitespace may surround an instruction but not split it
    std::size_t b = start;
    while (b < stop && is_space(text[b])) ++b;
    std::size_t e = stop;
    while (e > b && is_space(text[e - 1])) --e;
    if (b == e) throw ParseError("empty instruction", b);
    std::string_view token(text.data() + b, e - b);
    for (std::size_t i = 0; i < token.size(); ++i) {
      if (is_space(token[i])) throw ParseError("unexpected whitespace inside instruction", b + i);
    }
    instructions.push_back(parse_instruction(token, b));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return Program(std::move(instructions));
}

std::string to_string(const Instruction& instruction) {
  struct Visitor {
    std::string operator()(const PlainBasic& u) const { return u.name; }
    std::string operator()(const PosTest& u) const { return "+" + u.name; }
    std::string operator()(const NegTest& u) const { return "-" + u.name; }
    std::string operator()(const PlainRandom& u) const { return "%" + u.p.to_string(); }
    std::string operator()(const PosRandom& u) const { return "+%" + u.p.to_string(); }
    std::string operator()(const NegRandom& u) const { return "-%" + u.p.to_string(); }
    std::string operator()(const FwdJump& u) const { return "#" + std::to_string(u.offset); }
    std::string operator()(const BwdJump& u) const { return "\\" + std::to_string(u.offset); }
    std::string operator()(const Halt&) const { return "!"; }
  };
  return std::visit(Visitor{}, instruction);
}

std::string to_string(const Program& program) {
  std::string out;
  for (std::size_t i = 0; i < program.size(); ++i) {
    if (i) out += " ; ";
    out += to_string(program.instructions()[i]);
  }
  return out;
}

Action instruction_action(const std::string& name) { return Action::parse(name); }

Action random_action(const Probability& p) { return Action("random", random_get_method(p)); }

ThreadGraph extract_at(std::size_t position, const Program& program) {
  const std::size_t k = program.size();
  GraphBuilder builder;
  std::optional<NodeId> dead;
  auto dead_end = [&] {
    if (!dead) dead = builder.dead_end();
    return *dead;
  };
  std::unordered_map<std::size_t, NodeId> slots;
  std::vector<std::size_t> work;

  // follows jumps from `pos`; D when leaving 1..k or entering a jump cycle
  auto resolve = [&](std::size_t pos) -> NodeId {
    std::set<std::size_t> visited;
    while (true) {
      if (pos < 1 || pos > k) return dead_end();
      const Instruction& u = program.at(pos);
      if (const auto* f = std::get_if<FwdJump>(&u)) {
        if (!visited.insert(pos).second) return dead_end();
        pos += f->offset;
      } else if (const auto* b = std::get_if<BwdJump>(&u)) {
        if (!visited.insert(pos).second) return dead_end();
        pos = pos >= b->offset ? pos - b->offset : 0;
      } else {
        break;
      }
    }
    auto [it, fresh] = slots.emplace(pos, 0);
    if (fresh) {
      it->second = builder.reserve();
      work.push_back(pos);
    }
    return it->second;
  };

  NodeId root = resolve(position);
  while (!work.empty()) {
    std::size_t i = work.back();
    work.pop_back();
    NodeId slot = slots.at(i);
    struct Visitor {
      std::size_t i;
      decltype(resolve)& next;
      Node operator()(const PlainBasic& u) const {
        NodeId n = next(i + 1);
        return Post{instruction_action(u.name), n, n};
      }
      Node operator()(const PosTest& u) const { return Post{instruction_action(u.name), next(i + 1), next(i + 2)}; }
      Node operator()(const NegTest& u) const { return Post{instruction_action(u.name), next(i + 2), next(i + 1)}; }
      Node operator()(const PlainRandom& u) const {
        NodeId n = next(i + 1);
        return Post{random_action(u.p), n, n};
      }
      Node operator()(const PosRandom& u) const { return Post{random_action(u.p), next(i + 1), next(i + 2)}; }
      Node operator()(const NegRandom& u) const { return Post{random_action(u.p), next(i + 2), next(i + 1)}; }
      Node operator()(const FwdJump&) const { return DeadEnd{}; }
      Node operator()(const BwdJump&) const { return DeadEnd{}; }
      Node operator()(const Halt&) const { return Stop{}; }
    };
    builder.define(slot, std::visit(Visitor{i, resolve}, program.at(i)));
  }
  return builder.finish(root);
}

ThreadGraph extract(const Program& program, const ExtractOptions& options) {
  ThreadGraph g = extract_at(options.entry, program);
  if (options.use_random) g = use(g, ServiceFamily::singleton("random", make_random()));
  if (options.abstraction) g = abstract_tau(g);
  return normalize(g);
}

}  // namespace probthread::pglb
