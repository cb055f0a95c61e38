//! The identity catalog printed by `list` and `describe`.

pub struct Entry {
    pub tag: &'static str,
    pub equation: &'static str,
    pub statement: &'static str,
    pub keys: &'static str,
}

pub const CATALOG: &[Entry] = &[
    Entry {
        tag: "mecke",
        equation: "Eq. (5eq47)",
        statement: "E[sum_{x in gamma} h(gamma, x)] = E[int h(gamma + eps_x, x) rho(x) dx] under the Poisson law",
        keys: "a (function), f (cylinder, optional), samples, seed",
    },
    Entry {
        tag: "gnz",
        equation: "Eq. (5eq4)",
        statement: "E[sum_{x in gamma} h(gamma, x)] = E[int h(gamma + eps_x, x) exp(-E_x(gamma + eps_x)) rho(x) dx] under the Gibbs law",
        keys: "a (function), f (cylinder, optional), potential, samples, seed",
    },
    Entry {
        tag: "form_gibbs",
        equation: "Eq. (5eq3)",
        statement: "E[<grad F, grad G>] = E[int <grad_x grad^P F, grad_x grad^P G> exp(-E_x(gamma + eps_x)) rho(x) dx] under the Gibbs law; inner supports one interaction range inside the window",
        keys: "f, g (cylinders), potential, samples, seed",
    },
    Entry {
        tag: "chaos_orthogonality",
        equation: "Eq. (5eq38)",
        statement: "E[Q_n(phi) Q_m(psi)] = delta_nm n! (phi, psi)^n_{L2(sigma)} for all n, m <= max_order",
        keys: "phi, psi (functions), max_order (<= 3), samples, seed",
    },
    Entry {
        tag: "ibp",
        equation: "Eq. (5eq26)",
        statement: "E[(grad_v F) G] + E[F (grad_v G)] + E[F G B_v] = 0 under the Poisson law",
        keys: "f, g (cylinders), v (field), samples, seed",
    },
    Entry {
        tag: "div_duality",
        equation: "Eq. (5eq27)",
        statement: "E[<G v, grad F>] = -E[F div(G v)] with div(G v) = <grad G, v> + G B_v (Eq. (5eq28))",
        keys: "f, g (cylinders), v (field), samples, seed",
    },
    Entry {
        tag: "generator",
        equation: "Eq. (5eq31)",
        statement: "E[<grad F, grad G>] = E[(H F) G] with H the Dirichlet operator on cylinder functions (Eq. (5eq30))",
        keys: "f, g (cylinders), samples, seed",
    },
    Entry {
        tag: "form_poisson",
        equation: "Eq. (5eq43)",
        statement: "E[<grad F, grad G>] = E[int <grad_x grad^P F, grad_x grad^P G> rho(x) dx] under the Poisson law",
        keys: "f, g (cylinders), samples, seed",
    },
    Entry {
        tag: "closability",
        equation: "Eqs. (5eq51)-(5eq52), (5eq57); Example (5eq66)",
        statement: "grid estimate of the set where 1/rho is locally integrable; verdict holds / fails / inconclusive",
        keys: "density (`intensity`, `fat_cantor depth=..`, intensity family) or mode = \"pair\" (potential, configs), grid, floor, threshold",
    },
    Entry {
        tag: "annihilation",
        equation: "Eq. (5eq40)",
        statement: "int [Q_n(gamma + eps_x) - Q_n(gamma)] psi(x) rho(x) dx = n (phi, psi) Q_{n-1}(gamma) pointwise",
        keys: "phi, psi (functions), max_order (<= 3), configs, tolerance, seed",
    },
    Entry {
        tag: "oracle",
        equation: "Eqs. (5eq21)-(5eq22)",
        statement: "Monte Carlo mean of a functional against the truncated-series expectation on a small window",
        keys: "functional (`count` or `q1sq <function>`), law (`poisson` or `gibbs`), n_max, samples, seed",
    },
];

pub fn lookup(tag: &str) -> Option<&'static Entry> {
    CATALOG.iter().find(|e| e.tag == tag)
}

pub fn list_checks() -> String {
    let mut s = String::new();
    for e in CATALOG {
        s.push_str(&format!("{:<20} {}\n", e.tag, e.equation));
    }
    s
}

pub fn describe(tag: &str) -> Option<String> {
    let e = lookup(tag)?;
    Some(format!(
        "{}\n  cites: {}\n  identity: {}\n  keys: {}\n",
        e.tag, e.equation, e.statement, e.keys
    ))
}
