#include "fixtures.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <sstream>

#include "rtlmut/text.hpp"

namespace fs = std::filesystem;

namespace fixtures {

namespace {

std::atomic<int> g_dir_seq{0};

}  // namespace

TempDir::TempDir(const std::string& label) {
  fs::path base = fs::temp_directory_path() / "rtlmut-tests";
  fs::create_directories(base);
  path_ = (base / (label + "-" + std::to_string(::getpid()) + "-" +
                   std::to_string(g_dir_seq.fetch_add(1))))
              .string();
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string TempDir::file(const std::string& rel) const {
  fs::path p = fs::path(path_) / rel;
  fs::create_directories(p.parent_path());
  return p.string();
}

void write_text(const std::string& path, const std::string& text) {
  fs::create_directories(fs::path(path).parent_path());
  rtlmut::write_file(path, text);
}

std::string synth_module(const std::string& name, int stanzas, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> width(3, 15);
  std::uniform_int_distribution<int> pick(0, 2);

  std::ostringstream out;
  out << "// " << name << ": generated fixture\n";
  out << "// stanzas=" << stanzas << " seed=" << seed << "\n";
  out << "module " << name << " (\n";
  out << "  input  wire clk_i,\n";
  out << "  input  wire rst_ni,\n";
  out << "  input  wire [7:0] in_data_i,\n";
  out << "  input  wire in_valid_i,\n";
  out << "  output reg  [7:0] out_data_o,\n";
  out << "  output reg  out_valid_o\n";
  out << ");\n";
  out << "\n";
  out << "  localparam [1:0] ST_IDLE = 2'd0;\n";
  out << "  localparam [1:0] ST_RUN  = 2'd1;\n";
  out << "  localparam [1:0] ST_DONE = 2'd2;\n";
  out << "\n";
  out << "  reg [1:0] state_q, state_d;\n";
  out << "  reg [7:0] acc_q;\n";
  out << "  integer i;\n";

  for (int k = 0; k < stanzas; ++k) {
    int w = width(rng);
    std::string sk = std::to_string(k);
    out << "\n";
    out << "  // stage " << sk << "\n";
    out << "  reg  [" << w << ":0] buf" << sk << "_q;\n";
    out << "  wire [" << w << ":0] sum" << sk << " = buf" << sk << "_q + {" << (w - 7)
        << "'d0, in_data_i};\n";
    out << "\n";
    out << "  assign probe" << sk << "_o = sum" << sk << "[0] ^ buf" << sk << "_q[0];\n";
    out << "  assign mask" << sk << " = sum" << sk << " & buf" << sk << "_q;\n";
    out << "\n";
    out << "  always @(*) begin : comb" << sk << "\n";
    out << "    state_d = state_q;\n";
    out << "    if (in_valid_i && state_q == ST_IDLE) begin\n";
    out << "      state_d = ST_RUN;\n";
    out << "    end\n";
    out << "    case (state_q)\n";
    out << "      ST_RUN: state_d = ST_DONE;\n";
    out << "      ST_DONE: state_d = ST_IDLE;\n";
    out << "      default: state_d = ST_IDLE;\n";
    out << "    endcase\n";
    out << "  end\n";
    out << "\n";
    out << "  always @(posedge clk_i or negedge rst_ni) begin\n";
    out << "    if (!rst_ni) begin\n";
    out << "      buf" << sk << "_q <= 0;\n";
    out << "    end else if (state_q != ST_IDLE) begin\n";
    if (pick(rng) == 0) {
      out << "      for (i = 0; i < 4; i = i + 1) begin\n";
      out << "        acc_q[i] <= acc_q[i] ^ sum" << sk << "[i];\n";
      out << "      end\n";
    } else {
      out << "      buf" << sk << "_q <= {sum" << sk << "[" << (w - 1) << ":0], probe" << sk
          << "_o};\n";
    }
    out << "      out_data_o <= {acc_q[3:0], acc_q[7:4]};\n";
    out << "      out_valid_o <= state_q == ST_DONE || out_valid_o;\n";
    out << "    end\n";
    out << "  end\n";
  }

  out << "\n";
  out << "endmodule\n";
  return out.str();
}

std::vector<std::pair<std::string, std::string>> synth_corpus() {
  std::vector<std::pair<std::string, std::string>> corpus;
  for (int n = 0; n < 24; ++n) {
    int stanzas = 3 + n * 3;  // roughly 110 .. 2,100 lines
    std::string id = "synth" + std::to_string(n);
    corpus.emplace_back(id, synth_module(id, stanzas, 1000u + static_cast<unsigned>(n)));
  }
  return corpus;
}

StraddleFixture straddle_fixture() {
  std::vector<std::string> lines;
  auto add = [&](const std::string& l) { lines.push_back(l); };

  add("// straddle fixture");                       // 1
  add("// main block crosses the chunk boundary");  // 2
  add("module straddle (");                         // 3
  add("  input  wire clk_i,");                      // 4
  add("  input  wire rst_ni,");                     // 5
  add("  input  wire [7:0] a_i,");                  // 6
  add("  input  wire [7:0] b_i,");                  // 7
  add("  output reg [7:0] y_o");                    // 8
  add(");");                                        // 9
  add("");                                          // 10
  for (int k = 0; k < 8; ++k)                       // 11..18
    add("  reg [7:0] t" + std::to_string(k) + "_q;");
  add("");                                                  // 19
  add("  assign s0 = a_i & b_i;");                          // 20
  add("  assign s1 = a_i | b_i;");                          // 21
  add("  assign s2 = a_i ^ b_i;");                          // 22
  add("  assign s3 = {a_i[3:0], b_i[3:0]};");               // 23
  add("  assign s4 = a_i == b_i;");                         // 24
  add("");                                                  // 25
  add("  // deep pipeline, long enough to straddle");       // 26
  add("  always @(posedge clk_i or negedge rst_ni) begin"); // 27
  add("    if (!rst_ni) begin");                            // 28
  for (int k = 0; k < 8; ++k)                               // 29..36
    add("      t" + std::to_string(k) + "_q <= 8'd0;");
  add("    end else begin");                                // 37
  for (int k = 0; k < 28; ++k) {                            // 38..65
    int src = k % 8;
    int dst = (k + 1) % 8;
    add("      t" + std::to_string(dst) + "_q <= t" + std::to_string(src) + "_q + 8'd" +
        std::to_string(k) + ";");
  }
  add("      y_o <= t7_q;");  // 66
  add("    end");             // 67
  add("  end");               // 68
  add("");                    // 69
  add("  assign done = y_o != 8'd0;");  // 70
  add("  assign idle = ~done;");        // 71
  add("");                              // 72
  add("endmodule");                     // 73

  std::string text;
  for (const auto& l : lines) text += l + "\n";

  StraddleFixture fx;
  fx.text = text;
  auto region = [](int index, int start, int end, const std::string& synopsis) {
    rtlmut::Region r;
    r.index = index;
    r.start_line = start;
    r.end_line = end;
    r.synopsis = synopsis;
    return r;
  };
  fx.expected = {
      region(0, 1, 9, "module declaration and port list"),
      region(1, 10, 18, "signal and parameter declarations"),
      region(2, 19, 24, "continuous assignments"),
      region(3, 25, 68, "always block"),
      region(4, 69, 73, "continuous assignments"),
  };
  return fx;
}

nlohmann::json test_index_json() {
  auto cls = [](const std::string& id, const std::string& desc, const std::string& arity,
                const std::string& notes) {
    return nlohmann::json{
        {"id", id}, {"description", desc}, {"arity", arity}, {"applicability_notes", notes}};
  };
  nlohmann::json doc;
  doc["name"] = "test";
  doc["classes"] = nlohmann::json::array({
      cls("missing_assignment", "comment out an assignment", "single_line", "any assignment"),
      cls("wrong_assignment", "retarget an assignment", "single_line", "multi-signal regions"),
      cls("logic_bug", "flip a boolean operator", "single_line", "conditions"),
      cls("bitwise_corruption", "drop a bitwise operand", "single_line", "bitwise expressions"),
      cls("incorrect_data_size", "narrow a vector range", "single_line", "[N:0] ranges"),
      cls("adjacent_field_swap", "swap concatenation halves", "single_line", "concatenations"),
      cls("loop_modification", "shift loop bounds", "multi_line", "zero-based loops"),
      cls("fsm_transition_error", "retarget a state transition", "multi_line", "state machines"),
  });
  doc["specs"] = nlohmann::json::object();
  for (const auto& c : doc["classes"])
    doc["specs"][c.at("id").get<std::string>()] = {
        {"body", "Apply the " + c.at("id").get<std::string>() + " pattern.\nKeep the line count."},
        {"authored_by", "verification"}};
  return doc;
}

rtlmut::MutationIndex test_index() { return rtlmut::index_from_json(test_index_json()); }

std::string write_catalog(const TempDir& dir, const std::string& rel) {
  std::string path = dir.file(rel);
  write_text(path, test_index_json().dump(2) + "\n");
  return path;
}

nlohmann::json campaign_config(const TempDir& dir, int designs, int modules_per_design,
                               int scenarios_target) {
  nlohmann::json doc;
  doc["mode"] = "generation";
  doc["parallelism"] = "sequential";
  doc["scenarios_target"] = scenarios_target;
  doc["output_dir"] = dir.file("out");
  doc["catalog"] = {{"default_path", write_catalog(dir)}};
  doc["backend"] = {{"kind", "mock"}};
  doc["designs"] = nlohmann::json::array();
  for (int d = 0; d < designs; ++d) {
    nlohmann::json design;
    std::string did = "design" + std::to_string(d);
    design["design_id"] = did;
    design["evaluator"] = {{"kind", "mock"}, {"default_outcome", "detected"}};
    design["modules"] = nlohmann::json::array();
    for (int m = 0; m < modules_per_design; ++m) {
      std::string mid = "mod" + std::to_string(d) + std::to_string(m);
      std::string path = dir.file("rtl/" + did + "/" + mid + ".v");
      write_text(path, synth_module(mid, 5, 77u + static_cast<unsigned>(d * 10 + m)));
      design["modules"].push_back({{"module_id", mid}, {"path", path}});
    }
    doc["designs"].push_back(design);
  }
  return doc;
}

std::string write_campaign_config(const TempDir& dir, const nlohmann::json& doc,
                                  const std::string& rel) {
  std::string path = dir.file(rel);
  write_text(path, doc.dump(2) + "\n");
  return path;
}

}  // namespace fixtures
