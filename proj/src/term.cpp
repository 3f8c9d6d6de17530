#include "probthread/term.hpp"

#include <cctype>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

#include "probthread/error.hpp"

namespace probthread {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class TermParser {
 public:
  explicit TermParser(std::string_view text) : text_(text) {}

  TermPtr parse() {
    TermPtr t = term();
    skip();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_.substr(pos_, 2) == "//") {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool peek(char c) {
    skip();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string word() {
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_word_char(text_[pos_])) ++pos_;
    if (start == pos_) fail("expected identifier");
    return std::string(text_.substr(start, pos_ - start));
  }

  // f.m, tau, or a bare identifier; a method may carry a parenthesised
  // argument such as get(1/2).
  Action action() {
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() && (is_word_char(text_[pos_]) || text_[pos_] == '.' || text_[pos_] == ':')) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '(') {
      int depth = 0;
      do {
        if (text_[pos_] == '(') ++depth;
        if (text_[pos_] == ')') --depth;
        ++pos_;
      } while (pos_ < text_.size() && depth > 0);
      if (depth != 0) fail("unbalanced parenthesis in action");
    }
    if (start == pos_) fail("expected action");
    std::string_view raw = text_.substr(start, pos_ - start);
    if (raw.front() == '.' || raw.back() == '.') {
      pos_ = start;
      fail("malformed action");
    }
    return Action::parse(raw);
  }

  Probability probability() {
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '/' ||
                                   text_[pos_] == '-')) {
      ++pos_;
    }
    MeadowValue v;
    try {
      v = MeadowValue::parse(text_.substr(start, pos_ - start));
    } catch (const ParseError& e) {
      throw ParseError("malformed probability", start + e.position());
    }
    if (!is_probability(v)) {
      throw MalformedProbability("probability " + v.to_string() + " is outside [0,1] at offset " +
                                 std::to_string(start));
    }
    return Probability(v);
  }

  static TermPtr make(auto node) { return std::make_shared<const Term>(Term{std::move(node)}); }

  TermPtr term() {
    skip();
    std::size_t start = pos_;
    std::string w = word();
    if (w == "S") return make(term::Stop{});
    if (w == "D") return make(term::DeadEnd{});
    if (w == "post") {
      expect('(');
      Action a = action();
      expect(',');
      TermPtr x = term();
      expect(',');
      TermPtr y = term();
      expect(')');
      return make(term::Post{std::move(a), x, y});
    }
    if (w == "prefix") {
      expect('(');
      Action a = action();
      expect(',');
      TermPtr x = term();
      expect(')');
      return make(term::Post{std::move(a), x, x});
    }
    if (w == "fork") {
      expect('(');
      TermPtr z = term();
      expect(',');
      TermPtr x = term();
      expect(',');
      TermPtr y = term();
      expect(')');
      return make(term::Fork{z, x, y});
    }
    if (w == "prob") {
      expect('(');
      term::Prob p;
      do {
        Probability weight = probability();
        expect(':');
        p.branches.emplace_back(weight, term());
      } while (peek(',') && (++pos_, true));
      expect(')');
      return make(std::move(p));
    }
    if (w == "rec") {
      skip();
      if (pos_ < text_.size() && is_word_char(text_[pos_])) word();  // optional label
      expect('{');
      term::Rec r;
      do {
        std::string name = word();
        expect('=');
        TermPtr rhs = term();
        expect(';');
        r.equations.emplace_back(std::move(name), rhs);
      } while (!peek('}'));
      expect('}');
      if (word() != "in") fail("expected 'in'");
      r.body = term();
      return make(std::move(r));
    }
    if (w == "in" || w == "tau") {
      pos_ = start;
      fail("unexpected keyword '" + w + "'");
    }
    return make(term::Var{std::move(w)});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

class Compiler {
 public:
  NodeId compile(const Term& t) {
    return std::visit([this](const auto& n) { return this->visit(n); }, t.node);
  }

  GraphBuilder builder;

 private:
  NodeId visit(const term::Stop&) { return builder.stop(); }
  NodeId visit(const term::DeadEnd&) { return builder.dead_end(); }
  NodeId visit(const term::Post& p) {
    NodeId x = compile(*p.on_true);
    NodeId y = p.on_false == p.on_true ? x : compile(*p.on_false);
    return builder.post(p.action, x, y);
  }
  NodeId visit(const term::Fork& f) {
    NodeId z = compile(*f.forked);
    NodeId x = compile(*f.on_true);
    NodeId y = compile(*f.on_false);
    return builder.fork(z, x, y);
  }
  NodeId visit(const term::Prob& p) {
    std::vector<Branch> branches;
    for (const auto& [w, t] : p.branches) branches.push_back({w, compile(*t)});
    return builder.prob(std::move(branches));
  }
  NodeId visit(const term::Var& v) {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (auto found = it->find(v.name); found != it->end()) return found->second;
    }
    throw Error("free variable '" + v.name + "'");
  }
  NodeId visit(const term::Rec& r) {
    std::map<std::string, NodeId> scope;
    for (const auto& [name, rhs] : r.equations) {
      if (!scope.emplace(name, builder.reserve()).second) throw Error("variable '" + name + "' defined twice");
    }
    scopes_.push_back(scope);
    for (const auto& [name, rhs] : r.equations) builder.alias(scope.at(name), compile(*rhs));
    NodeId body = compile(*r.body);
    scopes_.pop_back();
    return body;
  }

  std::vector<std::map<std::string, NodeId>> scopes_;
};

constexpr std::size_t kInlineLimit = 4096;

class Printer {
 public:
  explicit Printer(const ThreadGraph& g) : g_(g) {}

  std::string print() {
    if (inline_size() <= kInlineLimit) return inline_term(g_.root());
    return recursive_form();
  }

 private:
  // Size of the fully unfolded tree, or kInlineLimit + 1 if cyclic or larger.
  std::size_t inline_size() {
    std::vector<std::size_t> size(g_.size(), 0);
    std::vector<std::uint8_t> state(g_.size(), 0);  // 0 new, 1 open, 2 done
    std::vector<std::pair<NodeId, bool>> stack{{g_.root(), false}};
    constexpr std::size_t kTooBig = kInlineLimit + 1;
    while (!stack.empty()) {
      auto [id, expanded] = stack.back();
      stack.pop_back();
      if (expanded) {
        std::size_t total = 1;
        for (NodeId c : children(id)) total = std::min(kTooBig, total + size[c]);
        size[id] = total;
        state[id] = 2;
        continue;
      }
      if (state[id] == 2) continue;
      if (state[id] == 1) return kTooBig;
      state[id] = 1;
      stack.emplace_back(id, true);
      for (NodeId c : children(id)) {
        if (state[c] == 1) return kTooBig;
        if (state[c] == 0) stack.emplace_back(c, false);
      }
    }
    return size[g_.root()];
  }

  std::vector<NodeId> children(NodeId id) const {
    const Node& n = g_.node(id);
    if (const auto* p = std::get_if<Post>(&n)) return {p->on_true, p->on_false};
    if (const auto* k = std::get_if<Fork>(&n)) return {k->forked, k->on_true, k->on_false};
    std::vector<NodeId> out;
    if (const auto* r = std::get_if<Prob>(&n)) {
      for (const auto& b : r->branches) out.push_back(b.target);
    }
    return out;
  }

  std::string inline_term(NodeId id) {
    return node_text(id, [this](NodeId c) { return inline_term(c); });
  }

  std::string node_text(NodeId id, const std::function<std::string(NodeId)>& child) {
    const Node& n = g_.node(id);
    if (std::holds_alternative<Stop>(n)) return "S";
    if (std::holds_alternative<DeadEnd>(n)) return "D";
    if (const auto* p = std::get_if<Post>(&n)) {
      if (p->on_true == p->on_false) return "prefix(" + p->action.to_string() + ", " + child(p->on_true) + ")";
      return "post(" + p->action.to_string() + ", " + child(p->on_true) + ", " + child(p->on_false) + ")";
    }
    if (const auto* k = std::get_if<Fork>(&n)) {
      return "fork(" + child(k->forked) + ", " + child(k->on_true) + ", " + child(k->on_false) + ")";
    }
    const auto& r = std::get<Prob>(n);
    std::string out = "prob(";
    for (std::size_t i = 0; i < r.branches.size(); ++i) {
      if (i) out += ", ";
      out += r.branches[i].weight.to_string() + ": " + child(r.branches[i].target);
    }
    return out + ")";
  }

  bool is_variable_node(NodeId id) const {
    const Node& n = g_.node(id);
    return std::holds_alternative<Post>(n) || std::holds_alternative<Fork>(n);
  }

  std::string recursive_form() {
    // number variable nodes in depth-first discovery order from the root
    std::unordered_map<NodeId, std::size_t> var;
    std::vector<NodeId> order;
    std::vector<NodeId> stack{g_.root()};
    std::vector<bool> seen(g_.size(), false);
    while (!stack.empty()) {
      NodeId id = stack.back();
      stack.pop_back();
      if (seen[id]) continue;
      seen[id] = true;
      if (is_variable_node(id)) {
        var.emplace(id, order.size());
        order.push_back(id);
      }
      auto kids = children(id);
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
        if (!seen[*it]) stack.push_back(*it);
      }
    }
    std::function<std::string(NodeId)> ref = [&](NodeId c) -> std::string {
      if (auto it = var.find(c); it != var.end()) return "X" + std::to_string(it->second);
      return node_text(c, ref);
    };
    std::ostringstream os;
    os << "rec X0 {";
    for (NodeId id : order) os << "\n  X" << var.at(id) << " = " << node_text(id, ref) << ";";
    os << "\n} in " << ref(g_.root());
    return os.str();
  }

  const ThreadGraph& g_;
};

}  // namespace

TermPtr parse_term(std::string_view text) { return TermParser(text).parse(); }

ThreadGraph build(const Term& term) {
  Compiler compiler;
  NodeId root = compiler.compile(term);
  return compiler.builder.finish(root);
}

ThreadGraph parse_thread(std::string_view text) { return build(*parse_term(text)); }

std::string format_thread(const ThreadGraph& graph) { return Printer(graph).print(); }

}  // namespace probthread
