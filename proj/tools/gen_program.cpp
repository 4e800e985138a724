// Writes mini-Java program graphs as XMI: the TCP-like fixture (optionally
// replicated to build large inputs) or a seeded random program.
//
//   grrw-genprog --tcp 1 -o fixtures/tcp_small.xmi
//   grrw-genprog --tcp 40 -o fixtures/tcp_large.xmi
//   grrw-genprog --random 7 -o /tmp/random7.xmi

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "grrw/reengineering.hpp"
#include "grrw/xmi.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate mini-Java program graphs as XMI"};
  std::size_t tcp_copies = 0;
  std::uint64_t seed = 0;
  grrw::reeng::RandomProgramOptions random_options;
  std::string root = ".";
  std::string output;
  auto* tcp = app.add_option("--tcp", tcp_copies, "TCP-like program with this many copies")
                  ->check(CLI::PositiveNumber);
  auto* random = app.add_option("--random", seed, "Random program from this seed");
  tcp->excludes(random);
  app.add_option("--max-classes", random_options.max_classes, "Random: class limit")
      ->needs(random);
  app.add_option("--max-statements", random_options.max_statements, "Random: statement limit")
      ->needs(random);
  app.add_option("--root", root, "Repository root holding fixtures/")->check(CLI::ExistingDirectory);
  app.add_option("-o,--output", output, "Output file (default: stdout)");
  try {
    app.parse(argc, argv);
    if (!*tcp && !*random) throw CLI::RequiredError("--tcp or --random");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    grrw::Graph graph(grrw::reeng::load_case_schema(grrw::reeng::CaseFiles{root}));
    grrw::reeng::ProgramBuilder builder(graph);
    if (*tcp) {
      grrw::reeng::build_tcp_program(builder, tcp_copies);
    } else {
      grrw::reeng::build_random_program(builder, seed, random_options);
    }
    if (output.empty()) {
      grrw::export_xmi(graph, builder.model(), std::cout);
    } else {
      std::ofstream out(output, std::ios::binary);
      grrw::export_xmi(graph, builder.model(), out);
      if (!out.flush()) throw grrw::Error("cannot write " + output);
    }
    std::cerr << graph.node_count() << " nodes, " << graph.edge_count() << " edges\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
