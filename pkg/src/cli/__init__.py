from cli import (
    bench,
    dictionary,
    evaluate,
    experiment,
    filtering,
    gradcheck,
    penet,
    synth,
    train,
)

COMMANDS = (
    dictionary,
    filtering,
    bench,
    synth,
    train,
    evaluate,
    penet,
    gradcheck,
    experiment,
)
