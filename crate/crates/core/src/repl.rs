//! Line-oriented interpreter loop.
//!
//! Queries stream their solutions one at a time: after each answer a line
//! containing `;` asks for the next one and anything else stops the search.

use std::io::{self, BufRead, Write};
use std::path::Path;

use crate::parser::{parse_program, parse_query};
use crate::solver::{Solution, SolveOptions, SolveRun};
use crate::term::{Program, Term};

const PROMPT: &str = "?- ";
const MORE_PROMPT: &str = " ;\n";

const HELP: &str = "\
enter a query such as parent(alice,X). and press enter
after an answer, type ; for the next one or just enter to stop
:load FILE   replace the program with the rules in FILE
:rules       list the program
:help        show this text
:quit        leave
";

pub struct Repl<W> {
    program: Program,
    opts: SolveOptions,
    out: W,
}

impl<W: Write> Repl<W> {
    pub fn new(program: Program, opts: SolveOptions, out: W) -> Self {
        Repl { program, opts, out }
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn into_output(self) -> W {
        self.out
    }

    /// Runs until `:quit` or end of input.
    pub fn run(&mut self, input: impl BufRead) -> io::Result<()> {
        let mut lines = input.lines();
        loop {
            write!(self.out, "{PROMPT}")?;
            self.out.flush()?;
            let Some(line) = lines.next().transpose()? else {
                writeln!(self.out)?;
                return Ok(());
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(cmd) = line.strip_prefix(':') {
                if !self.command(cmd)? {
                    return Ok(());
                }
                continue;
            }
            self.query(line, &mut lines)?;
        }
    }

    /// Returns false when the loop should end.
    fn command(&mut self, cmd: &str) -> io::Result<bool> {
        let (name, arg) = cmd.split_once(char::is_whitespace).unwrap_or((cmd, ""));
        let arg = arg.trim();
        match name {
            "quit" | "q" => return Ok(false),
            "rules" => write!(self.out, "{}", self.program)?,
            "help" => write!(self.out, "{HELP}")?,
            "load" if arg.is_empty() => writeln!(self.out, "error: :load needs a file name")?,
            "load" => match load(Path::new(arg)) {
                Ok(program) => {
                    writeln!(self.out, "loaded {} rules from {arg}.", program.len())?;
                    self.program = program;
                }
                Err(e) => writeln!(self.out, "error: {e}")?,
            },
            other => writeln!(self.out, "error: unknown command :{other} (try :help)")?,
        }
        Ok(true)
    }

    fn query<I>(&mut self, text: &str, lines: &mut I) -> io::Result<()>
    where
        I: Iterator<Item = io::Result<String>>,
    {
        let goals = match parse_query(text) {
            Ok(goals) => goals,
            Err(e) => return writeln!(self.out, "error: {e}"),
        };
        let mut run = match SolveRun::new(&self.program, &goals, self.opts.clone()) {
            Ok(run) => run,
            Err(e) => return writeln!(self.out, "error: {e}"),
        };
        loop {
            let Some(solution) = run.next() else {
                if let Some(budget) = run.budget_hit() {
                    writeln!(self.out, "% search stopped: {budget} budget reached")?;
                }
                return writeln!(self.out, "false.");
            };
            write!(self.out, "{}", answer(&solution))?;
            self.out.flush()?;
            let reply = match lines.next().transpose()? {
                Some(reply) => reply,
                None => return writeln!(self.out, "."),
            };
            if reply.trim() != ";" {
                return writeln!(self.out, ".");
            }
            write!(self.out, "{MORE_PROMPT}")?;
        }
    }
}

fn load(path: &Path) -> Result<Program, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_program(&src).map_err(|e| format!("{}:{e}", path.display()))
}

/// `X = bob,\nY = carol` for the bound query variables, `true` if none.
fn answer(solution: &Solution) -> String {
    let parts: Vec<String> = solution
        .bindings
        .iter()
        .filter(|(v, t)| !matches!(t, Term::Var(name) if name == v))
        .map(|(v, t)| format!("{v} = {t}"))
        .collect();
    if parts.is_empty() {
        "true".to_string()
    } else {
        parts.join(",\n")
    }
}
