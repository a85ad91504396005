class Keys:
    market = "market"
    probs = "probs"
    increments = "increments"
    claim = "claim"
    payoffs = "payoffs"
    seller = "seller"
    buyer = "buyer"
    utility = "utility"
    wealth = "wealth"
    lam = "lambda"
    sweep = "sweep"
    lambdas = "lambdas"
    curves = "curves"
    start = "start"
    stop = "stop"
    num = "num"
    options = "options"
    mz = "mz"
    mu = "mu"
    sigma = "sigma"
    rho = "rho"
    horizon = "T"
    y0 = "y0"
    diffusion = "a"
    drift = "b"
    payoff = "g"


class Options:
    engine = "engine"
    seed = "seed"
    paths = "paths"
    grid = "grid"
    t = "t"
    y = "y"
    side = "side"
    eps = "eps"
    stop = "stop"
    lattice_steps = "lattice_steps"


class Columns:
    curves = ["eps", "P_s", "P_b", "dP_s", "dP_b"]
    sweep = ["kind", "lambda", "price", "eps_s", "eps_b", "multiplier"]
    field = ["t", "y", "phi", "price"]
    stop = ["t", "y", "total_risk", "value", "stop"]
