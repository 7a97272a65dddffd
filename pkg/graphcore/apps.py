from django.apps import AppConfig


class GraphcoreConfig(AppConfig):
    name = 'graphcore'
