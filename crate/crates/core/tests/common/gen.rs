//! Random small MJ programs over a fixed class skeleton. The statements mix
//! object updates, possible null dereferences, handlers, bounded loops and
//! divisions, so generated tests pass, crash or fail assertions.

use proptest::prelude::*;

fn simple_stmt() -> impl Strategy<Value = String> {
    prop_oneof![
        (0i64..5).prop_map(|n| format!("a = new Cell({n});")),
        Just("a = null;".to_string()),
        Just("b = a;".to_string()),
        Just("b = new Cell(2);".to_string()),
        (0i64..4).prop_map(|n| format!("x = x + {n};")),
        Just("x = a.get();".to_string()),
        Just("a.set(x);".to_string()),
        Just("a.next = b;".to_string()),
        Just("b = a.next;".to_string()),
        Just("c = b;".to_string()),
        Just("acc = acc + c.v;".to_string()),
        (0i64..3).prop_map(|n| format!("x = acc / {n};")),
        (0i64..6).prop_map(|n| format!("assert(x != {n});")),
        (0i64..3).prop_map(|n| format!("x = helper(a, {n});")),
        Just("if (true) { Cell d = b; x = x + d.v; }".to_string()),
    ]
}

fn stmt() -> impl Strategy<Value = String> {
    simple_stmt().prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            (0i64..4, inner.clone(), inner.clone())
                .prop_map(|(n, s, t)| format!("if (x > {n}) {{ {s} }} else {{ {t} }}")),
            inner
                .clone()
                .prop_map(|s| format!("try {{ {s} }} catch (NPE e) {{ x = x + 1; }}")),
            inner.clone().prop_map(|s| format!("try {{ {s} }} catch (Any e) {{ x = x + 2; }}")),
            (1i64..5).prop_map(|n| format!("while (x < {n}) {{ x = x + 1; }}")),
        ]
    })
}

fn helper_stmt() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("acc = acc + p.v;".to_string()),
        Just("p.set(k);".to_string()),
        Just("if (p == null) { acc = acc + 1; }".to_string()),
        Just("c = p;".to_string()),
        Just("acc = acc + k;".to_string()),
    ]
}

/// Source text of a program whose test method is `t`.
pub fn program() -> impl Strategy<Value = String> {
    (
        prop::collection::vec(helper_stmt(), 0..3),
        prop::collection::vec(stmt(), 1..8),
    )
        .prop_map(|(helper, body)| {
            format!(
                "class Cell {{\n    int v;\n    Cell next;\n    Cell(int x) {{ v = x; }}\n    \
                 int get() {{ return v; }}\n    void set(int x) {{ v = x; }}\n}}\n\n\
                 class T {{\n    Cell c;\n    int acc;\n\n    \
                 int helper(Cell p, int k) {{\n        {}\n        return acc + k;\n    }}\n\n    \
                 test void t() {{\n        Cell a = new Cell(1);\n        Cell b = null;\n        \
                 int x = 0;\n        {}\n    }}\n}}\n",
                helper.join("\n        "),
                body.join("\n        ")
            )
        })
}
