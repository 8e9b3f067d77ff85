from experiments import fig1, fig4, regret, scaling, temporal_spectra
from models.experiment import ExperimentId

# Реестр экспериментов: идентификатор -> функция run(config, writer)
EXPERIMENTS = {
    ExperimentId.FIG1: fig1.run,
    ExperimentId.FIG2: temporal_spectra.run,
    ExperimentId.FIG3: temporal_spectra.run,
    ExperimentId.FIG4: fig4.run,
    ExperimentId.FIG5: scaling.run_fig5,
    ExperimentId.TABLE1: scaling.run_table1,
    ExperimentId.REGRET: regret.run,
}
