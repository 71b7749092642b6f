# Raw CSV intake and JSON codecs
