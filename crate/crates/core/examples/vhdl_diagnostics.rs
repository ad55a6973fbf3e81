//! Parses VHDL from a file (or a built-in broken sample) and prints the
//! line-numbered diagnostics, as a student would see them.
//!
//!     cargo run -p dclab --example vhdl_diagnostics -- my_design.vhd

use dclab::vhdl::{elaborate, parse_vhdl, VhdlUnit};
use dclab::ComponentRegistry;

const SAMPLE: &str = "library ieee;
use ieee.std_logic_1164.all;

entity blinker is
  port (clk : in std_logic; led : out std_logic);
end entity;

architecture rtl of blinker is
  signal state : std_logic := '0';
begin
  process (clk)
  begin
    if rising_edge(clk) then
      stat <= not state;
    end if;
  end process;
  led <= state;
end architecture;
";

fn main() {
    let unit = match std::env::args().nth(1) {
        Some(path) => VhdlUnit::new(path.clone(), std::fs::read_to_string(&path).unwrap()),
        None => VhdlUnit::new("blinker.vhd", SAMPLE),
    };
    let (ast, mut diags) = parse_vhdl(std::slice::from_ref(&unit));
    if diags.is_empty() {
        let top = ast
            .units
            .iter()
            .rev()
            .find_map(|u| match u {
                dclab::vhdl::ast::DesignUnit::Entity(e) => Some(e.name.name.clone()),
                _ => None,
            })
            .expect("an entity");
        diags = elaborate(&ast, &top, &ComponentRegistry::builtin()).1;
    }
    if diags.is_empty() {
        println!("{}: no problems", unit.source_name);
    }
    for d in &diags {
        println!("{d}");
    }
}
