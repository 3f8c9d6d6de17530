#include "probthread/service.hpp"

#include <cctype>

#include "probthread/error.hpp"

namespace probthread {

std::optional<Probability> Service::reply(std::string_view method) const {
  if (!behavior_) return std::nullopt;
  return behavior_->reply(method);
}

Service Service::derive(std::string_view method) const {
  if (!behavior_) return {};
  return behavior_->derive(method);
}

std::string Service::key() const { return behavior_ ? behavior_->key() : "Empty"; }

namespace {

class RandomService final : public ServiceBehavior {
 public:
  std::optional<Probability> reply(std::string_view method) const override { return parse_get(method); }

  Service derive(std::string_view method) const override {
    if (parse_get(method)) return make_random();
    return Service::empty();
  }

  std::string key() const override { return "Random"; }

 private:
  static std::optional<Probability> parse_get(std::string_view method) {
    constexpr std::string_view kPrefix = "get(";
    if (method.size() <= kPrefix.size() + 1 || method.substr(0, kPrefix.size()) != kPrefix || method.back() != ')') {
      return std::nullopt;
    }
    try {
      MeadowValue v = MeadowValue::parse(method.substr(kPrefix.size(), method.size() - kPrefix.size() - 1));
      if (!is_probability(v)) return std::nullopt;
      return Probability(v);
    } catch (const ParseError&) {
      return std::nullopt;
    }
  }
};

class RegisterService final : public ServiceBehavior {
 public:
  explicit RegisterService(bool value) : value_(value) {}

  std::optional<Probability> reply(std::string_view method) const override {
    if (method == "set:true" || method == "set:false") return Probability::one();
    if (method == "get") return value_ ? Probability::one() : Probability::zero();
    return std::nullopt;
  }

  Service derive(std::string_view method) const override {
    if (method == "set:true") return make_register(true);
    if (method == "set:false") return make_register(false);
    if (method == "get") return make_register(value_);
    return Service::empty();
  }

  std::string key() const override { return value_ ? "Register(true)" : "Register(false)"; }

 private:
  bool value_;
};

}  // namespace

Service make_random() {
  static const auto instance = std::make_shared<const RandomService>();
  return Service(instance);
}

Service make_register(bool initial) {
  static const auto on = std::make_shared<const RegisterService>(true);
  static const auto off = std::make_shared<const RegisterService>(false);
  return Service(initial ? on : off);
}

std::string random_get_method(const Probability& p) { return "get(" + p.to_string() + ")"; }

std::optional<std::string> conformance_violation(const Service& service, std::span<const std::string> probes) {
  for (const auto& m : probes) {
    if (service.reply(m).has_value() == service.derive(m).is_empty()) return m;
  }
  return std::nullopt;
}

ServiceFamily ServiceFamily::singleton(std::string focus, Service service) {
  ServiceFamily f;
  f.entries_.emplace(std::move(focus), std::move(service));
  return f;
}

ServiceFamily ServiceFamily::compose(const ServiceFamily& other) const {
  ServiceFamily out = *this;
  for (const auto& [focus, service] : other.entries_) {
    auto [it, fresh] = out.entries_.emplace(focus, service);
    if (!fresh) it->second = Service::empty();
  }
  return out;
}

ServiceFamily ServiceFamily::encapsulate(const std::set<std::string>& foci) const {
  ServiceFamily out;
  for (const auto& [focus, service] : entries_) {
    if (!foci.contains(focus)) out.entries_.emplace(focus, service);
  }
  return out;
}

const Service* ServiceFamily::find(const std::string& focus) const {
  auto it = entries_.find(focus);
  return it == entries_.end() ? nullptr : &it->second;
}

ServiceFamily ServiceFamily::with(const std::string& focus, Service service) const {
  ServiceFamily out = *this;
  out.entries_[focus] = std::move(service);
  return out;
}

std::string ServiceFamily::key() const {
  std::string k;
  for (const auto& [focus, service] : entries_) {
    k += focus;
    k += '\x1f';
    k += service.key();
    k += '\x1e';
  }
  return k;
}

std::string ServiceFamily::to_string() const {
  std::string out = "{";
  bool first = true;
  for (const auto& [focus, service] : entries_) {
    if (!first) out += ", ";
    first = false;
    out += focus + ": " + service.key();
  }
  return out + "}";
}

ServiceRegistry ServiceRegistry::with_builtins() {
  ServiceRegistry r;
  const std::vector<std::string> random_probes{"get(1/2)", "get(0)", "get(1)", "get(3/2)", "get", "set:true", "x"};
  r.add("Random", [](std::string_view) { return make_random(); }, "", random_probes);
  const std::vector<std::string> register_probes{"get", "set:true", "set:false", "get(1/2)", "x"};
  r.add(
      "Register",
      [](std::string_view arg) {
        if (arg == "true") return make_register(true);
        if (arg == "false" || arg.empty()) return make_register(false);
        throw Error("Register expects true or false, got '" + std::string(arg) + "'");
      },
      "true", register_probes);
  r.add("Empty", [](std::string_view) { return Service::empty(); }, "", {});
  return r;
}

void ServiceRegistry::add(std::string name, Factory factory, std::string_view sample_argument,
                          std::span<const std::string> probes) {
  Service sample = factory(sample_argument);
  if (auto bad = conformance_violation(sample, probes)) {
    throw Error("service '" + name + "' violates the reply/derive linkage on method '" + *bad + "'");
  }
  factories_[std::move(name)] = std::move(factory);
}

Service ServiceRegistry::make(const std::string& name, std::string_view argument) const {
  auto it = factories_.find(name);
  if (it == factories_.end()) throw Error("unknown service '" + name + "'");
  return it->second(argument);
}

ServiceFamily ServiceRegistry::parse_family(std::string_view text) const {
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto expect = [&](char c) {
    skip();
    if (pos >= text.size() || text[pos] != c) throw ParseError(std::string("expected '") + c + "'", pos);
    ++pos;
  };
  auto token = [&] {
    skip();
    std::size_t start = pos;
    while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_' ||
                                 text[pos] == ':')) {
      ++pos;
    }
    if (start == pos) throw ParseError("expected identifier", pos);
    return std::string(text.substr(start, pos - start));
  };
  auto ident = [&] {
    skip();
    std::size_t start = pos;
    while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) ++pos;
    if (start == pos) throw ParseError("expected identifier", pos);
    return std::string(text.substr(start, pos - start));
  };

  ServiceFamily family;
  expect('{');
  skip();
  if (pos < text.size() && text[pos] == '}') {
    ++pos;
  } else {
    while (true) {
      std::string focus = ident();
      expect(':');
      std::string name = token();
      std::string argument;
      skip();
      if (pos < text.size() && text[pos] == '(') {
        ++pos;
        std::size_t start = pos;
        while (pos < text.size() && text[pos] != ')') ++pos;
        if (pos >= text.size()) throw ParseError("unterminated service argument", start);
        argument = std::string(text.substr(start, pos - start));
        ++pos;
      }
      family = family.compose(ServiceFamily::singleton(focus, make(name, argument)));
      skip();
      if (pos < text.size() && text[pos] == ',') {
        ++pos;
        continue;
      }
      expect('}');
      break;
    }
  }
  skip();
  if (pos != text.size()) throw ParseError("unexpected trailing input", pos);
  return family;
}

}  // namespace probthread
