#include <iterator>
#include <random>

#include "grrw/reengineering.hpp"

namespace grrw::reeng {

ProgramBuilder::ProgramBuilder(Graph& graph) : g_(graph), model_(graph.add_node("java_Model")) {}

NodeRef ProgramBuilder::child(NodeRef parent, std::string_view edge, std::string_view cls) {
  NodeRef n = g_.add_node(cls);
  g_.add_edge(edge, parent, n);
  return n;
}

NodeRef ProgramBuilder::statement(NodeRef container, std::string_view cls) {
  const bool in_case = g_.class_name(container.id) == "java_SwitchCase";
  return child(container, in_case ? "java_SwitchCase_statements" : "java_Block_statements", cls);
}

NodeRef ProgramBuilder::method_call(NodeRef parent, std::string_view edge, const std::string& name) {
  NodeRef call = child(parent, edge, "java_MethodCall");
  g_.set_attr(call, "methodName", name);
  return call;
}

NodeRef ProgramBuilder::add_class(const std::string& name, bool is_abstract, NodeRef super) {
  NodeRef c = child(model_, "java_Model_classes", "java_Class");
  g_.set_attr(c, "name", name);
  g_.set_attr(c, "isAbstract", is_abstract);
  if (super) g_.add_edge("java_Class_extends", c, super);
  return c;
}

NodeRef ProgramBuilder::add_enum(const std::string& name) {
  NodeRef e = child(model_, "java_Model_enumerations", "java_Enumeration");
  g_.set_attr(e, "name", name);
  return e;
}

NodeRef ProgramBuilder::add_constant(NodeRef enumeration, const std::string& name) {
  NodeRef k = child(enumeration, "java_Enumeration_constants", "java_EnumConstant");
  g_.set_attr(k, "name", name);
  return k;
}

NodeRef ProgramBuilder::add_method(NodeRef cls, const std::string& name) {
  NodeRef m = child(cls, "java_Class_methods", "java_Method");
  g_.set_attr(m, "name", name);
  return child(m, "java_Method_body", "java_Block");
}

NodeRef ProgramBuilder::method_of(NodeRef body) const {
  return g_.source(EdgeRef{{g_.incoming(body, g_.schema().edge_class("java_Method_body")).at(0)}});
}

NodeRef ProgramBuilder::add_block(NodeRef container) { return statement(container, "java_Block"); }

NodeRef ProgramBuilder::add_switch(NodeRef container) { return statement(container, "java_Switch"); }

NodeRef ProgramBuilder::add_case(NodeRef switch_stmt, const std::string& constant) {
  NodeRef c = child(switch_stmt, "java_Switch_cases", "java_SwitchCase");
  g_.set_attr(c, "constantName", constant);
  return c;
}

NodeRef ProgramBuilder::add_try(NodeRef container) {
  NodeRef t = statement(container, "java_Try");
  return child(t, "java_Try_body", "java_Block");
}

NodeRef ProgramBuilder::try_of(NodeRef body) const {
  return g_.source(EdgeRef{{g_.incoming(body, g_.schema().edge_class("java_Try_body")).at(0)}});
}

NodeRef ProgramBuilder::add_catch(NodeRef try_body, const std::string& exception_type) {
  NodeRef c = child(try_of(try_body), "java_Try_catches", "java_CatchBlock");
  g_.set_attr(c, "exceptionType", exception_type);
  return child(c, "java_CatchBlock_body", "java_Block");
}

NodeRef ProgramBuilder::add_instance_call(NodeRef container, NodeRef target_class,
                                          const std::string& method_name) {
  NodeRef stmt = statement(container, "java_ExpressionStatement");
  NodeRef call = method_call(stmt, "java_ExpressionStatement_expression", method_name);
  NodeRef instance = method_call(call, "java_MethodCall_receiver", "Instance");
  g_.add_edge("java_MethodCall_target", call, instance);
  g_.add_edge("java_MethodCall_target", instance, target_class);
  return stmt;
}

NodeRef ProgramBuilder::add_activate(NodeRef container, NodeRef target_class) {
  return add_instance_call(container, target_class, "activate");
}

NodeRef ProgramBuilder::add_send(NodeRef container, NodeRef constant) {
  NodeRef stmt = statement(container, "java_ExpressionStatement");
  NodeRef call = method_call(stmt, "java_ExpressionStatement_expression", "send");
  NodeRef ref = child(call, "java_MethodCall_arguments", "java_EnumReference");
  g_.add_edge("java_EnumReference_constant", ref, constant);
  return stmt;
}

NodeRef ProgramBuilder::add_call(NodeRef container, const std::string& method_name) {
  NodeRef stmt = statement(container, "java_ExpressionStatement");
  method_call(stmt, "java_ExpressionStatement_expression", method_name);
  return stmt;
}

// ---------------------------------------------------------------------------

namespace {

struct TcpNames {
  std::string suffix;
  std::string operator()(const std::string& base) const { return base + suffix; }
};

void build_tcp_copy(ProgramBuilder& b, NodeRef state, const TcpNames& n) {
  NodeRef flags = b.add_enum(n("TcpFlags"));
  auto flag = [&](const char* name) { return b.add_constant(flags, name); };
  NodeRef syn = flag("SYN");
  NodeRef ack = flag("ACK");
  NodeRef fin = flag("FIN");
  NodeRef rst = flag("RST");
  NodeRef syn_ack = flag("SYN_ACK");

  NodeRef closing = b.add_class(n("ClosingState"), true, state);
  NodeRef closed = b.add_class(n("Closed"), false, state);
  NodeRef listen = b.add_class(n("Listen"), false, state);
  NodeRef syn_sent = b.add_class(n("SynSent"), false, state);
  NodeRef syn_rcvd = b.add_class(n("SynReceived"), false, state);
  NodeRef established = b.add_class(n("Established"), false, state);
  NodeRef fin_wait1 = b.add_class(n("FinWait1"), false, closing);
  NodeRef fin_wait2 = b.add_class(n("FinWait2"), false, closing);
  NodeRef close_wait = b.add_class(n("CloseWait"), false, closing);
  NodeRef closing_st = b.add_class(n("Closing"), false, closing);
  NodeRef last_ack = b.add_class(n("LastAck"), false, closing);
  NodeRef time_wait = b.add_class(n("TimeWait"), false, closing);
  NodeRef connection = b.add_class(n("Connection"));
  NodeRef packet = b.add_class(n("TcpPacket"));
  NodeRef timer = b.add_class(n("Timer"));
  NodeRef socket = b.add_class(n("Socket"));
  b.add_class(n("Logger"));

  // Closed: open() -> SynSent with SYN; listen() -> Listen.
  {
    NodeRef open = b.add_method(closed, "open");
    b.add_call(open, "allocate");
    b.add_send(open, syn);
    b.add_activate(open, syn_sent);
    NodeRef lst = b.add_method(closed, "listen");
    b.add_activate(lst, listen);
  }
  // Listen: run() switches on the received flag.
  {
    NodeRef run = b.add_method(listen, "run");
    b.add_call(run, "receive");
    NodeRef sw = b.add_switch(run);
    NodeRef c_syn = b.add_case(sw, "SYN");
    b.add_send(c_syn, syn_ack);
    b.add_activate(c_syn, syn_rcvd);
    NodeRef c_rst = b.add_case(sw, "RST");
    b.add_activate(c_rst, listen);  // self-transition
    NodeRef cls = b.add_method(listen, "close");
    b.add_activate(cls, closed);
  }
  // SynSent: SYN_ACK -> Established sending ACK; timeout -> Closed.
  {
    NodeRef run = b.add_method(syn_sent, "run");
    NodeRef body = b.add_try(run);
    NodeRef sw = b.add_switch(body);
    NodeRef c_sa = b.add_case(sw, "SYN_ACK");
    b.add_call(c_sa, "log");
    b.add_send(c_sa, ack);
    b.add_activate(c_sa, established);
    NodeRef c_syn = b.add_case(sw, "SYN");
    b.add_send(c_syn, ack);
    b.add_activate(c_syn, syn_rcvd);
    NodeRef timeout = b.add_catch(body, "TimeoutException");
    b.add_activate(timeout, closed);
    NodeRef cls = b.add_method(syn_sent, "close");
    b.add_activate(cls, closed);
  }
  // SynReceived: ACK -> Established; RST inside a nested block -> Listen.
  {
    NodeRef run = b.add_method(syn_rcvd, "run");
    NodeRef sw = b.add_switch(run);
    NodeRef c_ack = b.add_case(sw, "ACK");
    b.add_activate(c_ack, established);
    NodeRef c_rst = b.add_case(sw, "RST");
    NodeRef inner = b.add_block(c_rst);
    b.add_call(inner, "reset");
    b.add_activate(inner, listen);
    NodeRef cls = b.add_method(syn_rcvd, "close");
    b.add_send(cls, fin);
    b.add_activate(cls, fin_wait1);
  }
  // Established: FIN -> CloseWait with ACK; close() -> FinWait1 with FIN.
  {
    NodeRef run = b.add_method(established, "run");
    b.add_call(run, "receive");
    NodeRef sw = b.add_switch(run);
    NodeRef c_fin = b.add_case(sw, "FIN");
    b.add_send(c_fin, ack);
    b.add_activate(c_fin, close_wait);
    NodeRef cls = b.add_method(established, "close");
    b.add_send(cls, fin);
    b.add_activate(cls, fin_wait1);
  }
  // FinWait1: nested switch inside try.
  {
    NodeRef run = b.add_method(fin_wait1, "run");
    NodeRef body = b.add_try(run);
    NodeRef sw = b.add_switch(body);
    NodeRef c_ack = b.add_case(sw, "ACK");
    b.add_activate(c_ack, fin_wait2);
    NodeRef c_fin = b.add_case(sw, "FIN");
    b.add_send(c_fin, ack);
    b.add_activate(c_fin, closing_st);
    NodeRef io = b.add_catch(body, "IOException");
    b.add_call(io, "log");
    b.add_activate(io, closed);
  }
  // FinWait2: FIN -> TimeWait.
  {
    NodeRef run = b.add_method(fin_wait2, "run");
    NodeRef sw = b.add_switch(run);
    NodeRef c_fin = b.add_case(sw, "FIN");
    b.add_send(c_fin, ack);
    b.add_activate(c_fin, time_wait);
  }
  // CloseWait: close() -> LastAck.
  {
    NodeRef cls = b.add_method(close_wait, "close");
    b.add_send(cls, fin);
    b.add_activate(cls, last_ack);
  }
  // Closing: ACK -> TimeWait.
  {
    NodeRef run = b.add_method(closing_st, "run");
    NodeRef sw = b.add_switch(run);
    NodeRef c_ack = b.add_case(sw, "ACK");
    b.add_activate(c_ack, time_wait);
  }
  // LastAck: ACK -> Closed.
  {
    NodeRef run = b.add_method(last_ack, "run");
    NodeRef sw = b.add_switch(run);
    NodeRef c_ack = b.add_case(sw, "ACK");
    b.add_activate(c_ack, closed);
  }
  // TimeWait: plain run() -> Closed (fallback trigger); timeout catch -> self.
  {
    NodeRef run = b.add_method(time_wait, "run");
    b.add_call(run, "sleep");
    b.add_activate(run, closed);
    NodeRef body = b.add_try(run);
    b.add_call(body, "await");
    NodeRef again = b.add_catch(body, "InterruptedException");
    b.add_activate(again, time_wait);
  }
  // Outside the State hierarchy: these calls produce no transitions.
  {
    NodeRef init = b.add_method(connection, "init");
    b.add_activate(init, closed);
    NodeRef abort = b.add_method(connection, "abort");
    b.add_send(abort, rst);
    b.add_instance_call(abort, closed, "reset");
    NodeRef parse = b.add_method(packet, "parse");
    b.add_call(parse, "readHeader");
    NodeRef tick = b.add_method(timer, "tick");
    b.add_call(tick, "fire");
    NodeRef connect = b.add_method(socket, "connect");
    b.add_call(connect, "open");
  }
}

}  // namespace

void build_tcp_program(ProgramBuilder& b, std::size_t copies) {
  NodeRef state = b.add_class("State", true);
  for (std::size_t i = 0; i < copies; ++i) {
    build_tcp_copy(b, state, TcpNames{i == 0 ? std::string() : "_" + std::to_string(i)});
  }
}

// ---------------------------------------------------------------------------

namespace {

class RandomProgram {
 public:
  RandomProgram(ProgramBuilder& b, std::uint64_t seed, const RandomProgramOptions& options)
      : b_(b), rng_(seed), options_(options) {}

  void run() {
    const std::size_t n_classes = std::max<std::size_t>(1, pick(1, options_.max_classes));
    const std::size_t budget = pick(0, options_.max_statements);

    NodeRef state = b_.add_class("State", true);
    classes_.push_back(state);
    for (std::size_t i = 1; i < n_classes; ++i) {
      // Extends an earlier class (acyclic), or stands alone.
      NodeRef super = chance(0.8) ? classes_[pick(0, classes_.size() - 1)] : NodeRef{};
      classes_.push_back(b_.add_class("C" + std::to_string(i), chance(0.2), super));
    }

    NodeRef flags = b_.add_enum("Flags");
    const std::size_t n_constants = pick(1, 5);
    for (std::size_t k = 0; k < n_constants; ++k) {
      constants_.push_back(b_.add_constant(flags, chance(0.05) ? "" : "K" + std::to_string(k)));
    }

    // Bodies for a subset of the classes; statements are spread over them.
    std::vector<NodeRef> bodies;
    for (NodeRef c : classes_) {
      const std::size_t n_methods = pick(0, 2);
      for (std::size_t m = 0; m < n_methods; ++m) bodies.push_back(b_.add_method(c, method_name()));
    }
    if (bodies.empty()) return;
    while (statements_ < budget) fill(bodies[pick(0, bodies.size() - 1)], 0, budget);
  }

 private:
  // Plain modulo arithmetic instead of <random> distributions, whose output
  // differs between standard libraries: a seed names the same program
  // everywhere.
  std::size_t pick(std::size_t lo, std::size_t hi) {
    if (hi <= lo) return lo;
    return lo + static_cast<std::size_t>(rng_() % (hi - lo + 1));
  }
  bool chance(double p) { return static_cast<double>(rng_() % 1'000'000) < p * 1'000'000; }

  std::string method_name() {
    static const char* const kNames[] = {"run", "run", "run", "open", "close", "receive", "timeout"};
    if (chance(0.03)) return "";
    return kNames[pick(0, std::size(kNames) - 1)];
  }
  std::string label(const char* base) {
    if (chance(0.05)) return "";
    return std::string(base) + std::to_string(pick(0, 5));
  }
  NodeRef any_class() { return classes_[pick(0, classes_.size() - 1)]; }

  // Adds a few statements to `container` (a block or switch case).
  void fill(NodeRef container, int depth, std::size_t budget) {
    const std::size_t n = pick(1, 4);
    for (std::size_t i = 0; i < n && statements_ < budget; ++i) {
      ++statements_;
      const std::size_t kind = pick(0, depth >= 4 ? 5 : 8);
      switch (kind) {
        case 0:
        case 1:
          b_.add_activate(container, any_class());
          break;
        case 2:
          b_.add_send(container, constants_[pick(0, constants_.size() - 1)]);
          break;
        case 3:
          b_.add_call(container, chance(0.3) ? "send" : (chance(0.3) ? "activate" : "work"));
          break;
        case 4:
          // Near misses: the activate shape with another method name.
          b_.add_instance_call(container, any_class(), chance(0.5) ? "deactivate" : "Instance");
          break;
        case 5:
          if (chance(0.3)) {
            b_.add_activate(container, any_class());
          } else {
            b_.add_call(container, "noop");
          }
          break;
        case 6:
          fill(b_.add_block(container), depth + 1, budget);
          break;
        case 7: {
          NodeRef sw = b_.add_switch(container);
          const std::size_t cases = pick(1, 3);
          for (std::size_t c = 0; c < cases; ++c) fill(b_.add_case(sw, label("CASE")), depth + 1, budget);
          break;
        }
        case 8: {
          NodeRef body = b_.add_try(container);
          fill(body, depth + 1, budget);
          const std::size_t catches = pick(0, 2);
          for (std::size_t c = 0; c < catches; ++c) fill(b_.add_catch(body, label("Ex")), depth + 1, budget);
          break;
        }
      }
    }
  }

  ProgramBuilder& b_;
  std::mt19937_64 rng_;
  RandomProgramOptions options_;
  std::vector<NodeRef> classes_;
  std::vector<NodeRef> constants_;
  std::size_t statements_ = 0;
};

}  // namespace

void build_random_program(ProgramBuilder& b, std::uint64_t seed, const RandomProgramOptions& options) {
  RandomProgram(b, seed, options).run();
}

}  // namespace grrw::reeng
