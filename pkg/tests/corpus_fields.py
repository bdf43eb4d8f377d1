"""Every coefficient expression appearing in the regression corpus."""

CORPUS_FIELDS = [
    ("ex31.r", "-t^2", 1.0),
    ("ex31.gamma", "2*t", 1.0),
    ("ex32.q", "1 + 2*sin(t)", 0.0),
    ("ex32.r", "2*sin(t) - sin(t^2)^2/(1+t^2)", 0.0),
    ("ex33.q", "sin(t)", 0.0),
    ("ex33.r", "cos(t) + atan(t^2)/(1+abs(t^3))", 0.0),
    ("ex33.gamma", "-sin(t)", 0.0),
    ("ex34.q", "t", 0.0),
    ("ex34.r", "1 + sin(exp(t))/(1+abs(t)^1)", 0.0),
    ("ex34.gamma", "-t", 0.0),
    ("thm32.r", "exp(-3*t)", 0.0),
    ("decaying.rk", "1/t", 1.0),
    ("whyburn.r1", "1", 0.0),
    ("nonsmooth.p", "1 + abs(sin(t))", 0.0),
]
