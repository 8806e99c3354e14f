from django.apps import AppConfig


class StochSumConfig(AppConfig):
    name = "stochsum"
    verbose_name = "Stochastic Summability"
