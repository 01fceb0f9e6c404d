"""Random structured programs for property tests."""

import random

from pathga.lang import Assign, BinOp, Compare, If, InputDecl, Num, Program, Record, Var, While

INPUTS = ("x", "y")


def _expr(rng, depth=0):
    roll = rng.random()
    if depth > 1 or roll < 0.4:
        return Var(rng.choice(INPUTS)) if rng.random() < 0.6 else Num(rng.randint(0, 20))
    return BinOp(rng.choice("+-*"), _expr(rng, depth + 1), _expr(rng, depth + 1))


def _pred(rng):
    return Compare(rng.choice(("<", "<=", ">", ">=", "=", "!=")), _expr(rng), _expr(rng))


def random_program(rng: random.Random, max_predicates: int = 6, loops: bool = True) -> Program:
    """Structured program over inputs x, y with at most ``max_predicates`` decisions."""
    budget = [rng.randint(0, max_predicates)]

    def block(depth):
        stmts = []
        for _ in range(rng.randint(0, 3)):
            roll = rng.random()
            if budget[0] > 0 and depth < 4 and roll < 0.45:
                budget[0] -= 1
                if loops and rng.random() < 0.3:
                    # decrementing counter keeps most generated loops finite
                    stmts.append(While(Compare(">", Var("x"), Num(0)),
                                       block(depth + 1) + (Assign("x", BinOp("-", Var("x"), Num(1))),)))
                else:
                    stmts.append(If(_pred(rng), block(depth + 1), block(depth + 1) if rng.random() < 0.6 else ()))
            elif roll < 0.8:
                stmts.append(Assign(rng.choice(INPUTS), _expr(rng)))
            else:
                stmts.append(Record("r", _expr(rng)))
        return tuple(stmts)

    body = block(0)
    while budget[0] > 0 and rng.random() < 0.7:
        budget[0] -= 1
        body += (If(_pred(rng), block(1), block(1)),)
    return Program((InputDecl("x", -10, 10), InputDecl("y", -10, 10)), body)


def count_predicates(program: Program) -> int:
    from pathga.lang import iter_predicates
    return sum(1 for _ in iter_predicates(program))
