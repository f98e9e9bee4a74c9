//! Substitute-then-unify without an occurs check.
//!
//! Both terms are first fully substituted under the current environment; a
//! variable on either side is then bound to the other side, and two compounds
//! unify argument by argument when their functors and arities agree. Binding
//! `X` to `f(X)` succeeds and leaves a cyclic environment behind; every later
//! substitution over it reports [`SubstError::BudgetExhausted`].

use crate::term::{apply_subst_term, Env, SubstError, Term, DEFAULT_SUBST_BUDGET};

/// Unifies `left` and `right` under `env`.
///
/// An absent input environment short-circuits to an absent result. `Ok(None)`
/// is ordinary failure; `Err` only arises when substitution over a cyclic
/// environment runs out of budget.
pub fn unify(left: &Term, right: &Term, env: Option<Env>) -> Result<Option<Env>, SubstError> {
    unify_with_budget(left, right, env, DEFAULT_SUBST_BUDGET)
}

pub fn unify_with_budget(
    left: &Term,
    right: &Term,
    env: Option<Env>,
    budget: usize,
) -> Result<Option<Env>, SubstError> {
    let Some(mut env) = env else {
        return Ok(None);
    };
    if unify_in_place(left, right, &mut env, budget)? {
        Ok(Some(env))
    } else {
        Ok(None)
    }
}

/// Extends `env` in place. On a `false` return `env` may hold partial
/// bindings and must be discarded by the caller.
pub(crate) fn unify_in_place(left: &Term, right: &Term, env: &mut Env, budget: usize) -> Result<bool, SubstError> {
    let left = apply_subst_term(env, left, budget)?;
    let right = apply_subst_term(env, right, budget)?;
    match (left, right) {
        (Term::Var(x), Term::Var(y)) if x == y => Ok(true),
        (Term::Var(x), other) | (other, Term::Var(x)) => {
            // `x` is unbound after substitution and `other` is not `x` itself.
            env.bind(x, other).expect("self-binding excluded above");
            Ok(true)
        }
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            if f != g || xs.len() != ys.len() {
                return Ok(false);
            }
            for (x, y) in xs.iter().zip(&ys) {
                if !unify_in_place(x, y, env, budget)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Cheap pre-check: can these two terms possibly unify at the top level?
pub(crate) fn heads_compatible(a: &Term, b: &Term) -> bool {
    match (a.functor(), b.functor()) {
        (Some(fa), Some(fb)) => fa == fb,
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::apply_subst_term;

    fn v(n: &str) -> Term {
        Term::var(n)
    }
    fn c(n: &str) -> Term {
        Term::constant(n)
    }
    fn f(n: &str, args: Vec<Term>) -> Term {
        Term::compound(n, args)
    }
    fn empty() -> Option<Env> {
        Some(Env::new())
    }

    #[test]
    fn binds_variable() {
        let env = unify(&v("X"), &c("a"), empty()).unwrap().unwrap();
        assert_eq!(env, Env::new().with("X", c("a")).unwrap());
    }

    #[test]
    fn pairwise_compound() {
        let env = unify(&f("f", vec![v("X"), c("b")]), &f("f", vec![c("a"), v("Y")]), empty())
            .unwrap()
            .unwrap();
        assert_eq!(env, Env::new().with("X", c("a")).unwrap().with("Y", c("b")).unwrap());
    }

    #[test]
    fn functor_and_arity_mismatch() {
        assert_eq!(
            unify(&f("f", vec![c("a")]), &f("g", vec![c("a")]), empty()).unwrap(),
            None
        );
        assert_eq!(
            unify(&f("f", vec![c("a")]), &f("f", vec![c("a"), c("b")]), empty()).unwrap(),
            None
        );
    }

    #[test]
    fn no_occurs_check() {
        let fx = f("f", vec![v("X")]);
        let env = unify(&v("X"), &fx, empty()).unwrap().unwrap();
        assert_eq!(env, Env::new().with("X", fx).unwrap());
        assert!(apply_subst_term(&env, &v("X"), 64).is_err());
    }

    #[test]
    fn absent_env_short_circuits() {
        assert_eq!(unify(&v("X"), &c("a"), None).unwrap(), None);
    }

    #[test]
    fn same_variable_leaves_env_unchanged() {
        let env = Env::new().with("Y", v("X")).unwrap();
        assert_eq!(unify(&v("X"), &v("Y"), Some(env.clone())).unwrap(), Some(env));
    }

    #[test]
    fn variable_pairs_bind_left_to_right() {
        let env = unify(&v("X"), &v("Y"), empty()).unwrap().unwrap();
        assert_eq!(env.get("X"), Some(&v("Y")));
        assert_eq!(env.get("Y"), None);
    }

    #[test]
    fn substitutes_before_unifying() {
        let env = Env::new().with("X", c("a")).unwrap();
        assert_eq!(unify(&v("X"), &c("b"), Some(env.clone())).unwrap(), None);
        assert_eq!(unify(&v("X"), &c("a"), Some(env.clone())).unwrap(), Some(env));
    }

    #[test]
    fn repeated_variable_across_arguments() {
        // f(X, X) against f(a, b) must fail once X is bound by the first pair.
        let l = f("f", vec![v("X"), v("X")]);
        assert_eq!(unify(&l, &f("f", vec![c("a"), c("b")]), empty()).unwrap(), None);
        let env = unify(&l, &f("f", vec![c("a"), v("Y")]), empty()).unwrap().unwrap();
        assert_eq!(apply_subst_term(&env, &v("Y"), 16).unwrap(), c("a"));
    }
}
