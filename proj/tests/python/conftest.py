import json
import os
import pathlib

import pytest

ASSETS = pathlib.Path(os.environ["RTLMUT_ASSETS"])

MODULE = """\
// counter: python test fixture
module counter (
  input  wire clk_i,
  input  wire rst_ni,
  output reg [7:0] count_q
);

  wire [7:0] next = count_q + 8'd1;
  wire wrap = count_q == 8'hff;
  wire tick = rst_ni && !wrap;

  assign probe_o = next[0] ^ count_q[0];
  assign mask_o = next & count_q;

  always @(posedge clk_i or negedge rst_ni) begin
    if (!rst_ni) begin
      count_q <= 8'd0;
    end else if (wrap) begin
      count_q <= 8'd0;
    end else begin
      count_q <= next;
    end
  end

endmodule
"""


@pytest.fixture
def module_text():
    return MODULE


@pytest.fixture
def campaign_config(tmp_path):
    rtl = tmp_path / "rtl"
    rtl.mkdir()
    (rtl / "counter.v").write_text(MODULE)
    config = {
        "scenarios_target": 2,
        "output_dir": str(tmp_path / "out"),
        "backend": {"kind": "mock"},
        "catalog": {"default_path": str(ASSETS / "catalog" / "baseline.json")},
        "designs": [
            {
                "design_id": "demo",
                "evaluator": {"kind": "mock", "default_outcome": "detected"},
                "modules": [{"module_id": "counter", "path": "rtl/counter.v"}],
            }
        ],
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config, indent=2))
    return path
