//! Classifies models as known, epsilon-known or uncertain.

use aimc::graph::{bottom_sccs, structure_status};
use aimc::model::{AimcModel, Interval};
use aimc::rational::{int, ratio};

fn show(label: &str, m: &AimcModel) {
    let st = structure_status(m);
    print!("{label}: {}", st.kind.as_str());
    if let Some(e) = &st.epsilon_struct {
        print!(", epsilon = {e}");
    }
    if let Some(opt) = &st.optional_edges {
        print!(", {} optional edges", opt.len());
    }
    if let Some(g) = &st.graph {
        print!(", bottom SCCs {:?}", bottom_sccs(g));
    }
    println!();
}

fn main() -> aimc::Result<()> {
    let build = |lo| -> aimc::Result<AimcModel> {
        let mut m = AimcModel::new(["s", "t", "f"])?;
        m.add_transition("s", "t", Interval::closed(lo, ratio(3, 4))?)?;
        m.add_transition("s", "f", Interval::closed(ratio(1, 4), int(1))?)?;
        m.add_transition("t", "t", Interval::point(int(1)))?;
        m.add_transition("f", "f", Interval::point(int(1)))?;
        Ok(m)
    };
    show("closed away from zero", &build(ratio(1, 4))?);
    show("may vanish", &build(int(0))?);

    let mut open = AimcModel::new(["s", "t"])?;
    open.add_transition("s", "t", Interval::new(int(0), true, int(1), false)?)?;
    open.add_transition("s", "s", Interval::new(int(0), true, int(1), true)?)?;
    open.add_transition("t", "t", Interval::point(int(1)))?;
    show("open at zero", &open);
    Ok(())
}
